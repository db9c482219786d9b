import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from besselspdc.quad import (QuadratureError, QuadratureSpec, gauss_legendre, integrate_2d,
                             integrate_periodic, parallel_cell_map, trapezoid_periodic)


def test_periodic_exact_for_trig_polynomials():
    assert trapezoid_periodic(lambda p: np.full_like(p, 3.0), 8) == pytest.approx(6 * math.pi, rel=1e-15)
    assert trapezoid_periodic(lambda p: np.cos(p) ** 2, 8) == pytest.approx(math.pi, rel=1e-15)
    r = integrate_periodic(lambda p: np.cos(p) ** 2, 8)
    assert r.converged and r.error < 1e-14


@given(n=st.integers(1, 20))
def test_periodic_kills_harmonics_below_n(n):
    assert abs(trapezoid_periodic(lambda p: np.cos((n - 1) * p + 0.3) if n > 1 else np.zeros_like(p),
                                  n + 1)) < 1e-12


def test_periodic_unconverged_flag():
    r = integrate_periodic(lambda p: np.exp(50 * np.cos(p)), 4, rel_tol=1e-12, max_doublings=1)
    assert not r.converged
    assert r.doublings == 1


def test_annulus_area():
    r = integrate_2d(lambda r, p: np.ones_like(r * p), (1.0, 2.0), QuadratureSpec(8, 8))
    assert r.value == pytest.approx(3 * math.pi, rel=1e-14)


@pytest.mark.parametrize("kappa,w", [(0.05, 0.0007), (0.5, 0.05)])
def test_gaussian_annulus_closed_form(kappa, w):
    # ∫ exp(−(r−κ)²/W²) r dr dφ = 2π·κ W √π for a ring well away from r = 0
    f = lambda r, p: np.exp(-((r - kappa) ** 2) / w**2) + 0 * p
    r = integrate_2d(f, (kappa - 8 * w, kappa + 8 * w), QuadratureSpec(32, 16, rel_tol=1e-12))
    assert r.converged
    assert r.value == pytest.approx(2 * math.pi * kappa * w * math.sqrt(math.pi), rel=1e-12)


def test_non_finite_raises():
    with pytest.raises(QuadratureError, match="abscissa"):
        integrate_2d(lambda r, p: np.where(r > 1.0, np.nan, 1.0) + 0 * p, (0.0, 2.0), QuadratureSpec(8, 8))


def test_spec_validation_and_doubling():
    s = QuadratureSpec(16, 32)
    assert s.doubled().level(0) == (32, 64)
    assert s.level(2) == (64, 128)
    for bad in (dict(radial_points=4), dict(rel_tol=0.0), dict(max_doublings=0), dict(abs_tol=-1)):
        with pytest.raises(ValueError):
            QuadratureSpec(**bad)


def test_gauss_legendre_polynomial():
    x, w = gauss_legendre(5, -1.0, 3.0)
    assert np.sum(w * x**9) == pytest.approx((3**10 - 1) / 10, rel=1e-13)


def square(x):
    if x == 7:
        raise RuntimeError("boom")
    return x * x


@pytest.mark.parametrize("workers", [1, 3, 8])
def test_cell_map_deterministic_with_errors(workers):
    res = parallel_cell_map(square, list(range(50)), workers=workers, chunk_size=4)
    assert res.values[:7] == [i * i for i in range(7)]
    assert res.values[7] is None
    assert list(res.errors) == [7] and "boom" in res.errors[7]
    assert not res.ok


def test_cell_map_progress():
    seen = []
    res = parallel_cell_map(lambda x: x, list(range(10)), workers=1, chunk_size=3,
                            progress=lambda d, n: seen.append((d, n)))
    assert res.ok and seen[-1] == (10, 10)


def test_workers_env(monkeypatch):
    from besselspdc.quad import default_workers
    monkeypatch.setenv("SPDC_WORKERS", "3")
    assert default_workers() == 3
    monkeypatch.setenv("SPDC_WORKERS", "x")
    with pytest.raises(ValueError):
        default_workers()
