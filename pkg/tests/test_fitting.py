import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from besselspdc.fitting import bilinear, kasa_circle, ring_ridge, two_cone_fit
from besselspdc.spectra import GridSpec, SpectrumGrid


def ring_map(n, half, rings):
    spec = GridSpec(n, n, (-half, half), (-half, half))
    p = spec.points()
    v = np.zeros((n, n))
    for cx, cy, r, s in rings:
        d = np.hypot(p[..., 0] - cx, p[..., 1] - cy)
        v += np.exp(-((d - r) ** 2) / (2 * s * s))
    return SpectrumGrid(spec.kx_range, spec.ky_range, v)


@given(cx=st.floats(-5, 5), cy=st.floats(-5, 5), r=st.floats(0.1, 10))
def test_kasa_exact_on_circle(cx, cy, r):
    t = np.linspace(0, 2 * np.pi, 17)[:-1]
    fit = kasa_circle(cx + r * np.cos(t), cy + r * np.sin(t))
    assert fit == pytest.approx((cx, cy, r), rel=1e-8, abs=1e-8)


def test_kasa_needs_points():
    with pytest.raises(ValueError):
        kasa_circle([0, 1], [0, 1])


def test_bilinear_exact_for_planes():
    spec = GridSpec(5, 7, (-1, 1), (0, 3))
    p = spec.points()
    g = SpectrumGrid(spec.kx_range, spec.ky_range, 2 + p[..., 0] + 3 * p[..., 1])
    x, y = np.array([0.13, -0.77]), np.array([2.9, 0.41])
    assert bilinear(g, x, y) == pytest.approx(2 + x + 3 * y, rel=1e-14)
    assert bilinear(g, 5.0, 1.0) == 0.0


def test_ring_ridge_radius_and_width():
    s = 0.01
    g = ring_map(201, 0.7, [(0.0, 0.0, 0.5, s)])
    rd = ring_ridge(g, (0, 0), (0.3, 0.65))
    assert rd.mean_radius() == pytest.approx(0.5, abs=1e-3)
    assert np.nanmedian(rd.fwhm) == pytest.approx(2 * math.sqrt(2 * math.log(2)) * s, rel=0.05)
    cx, cy, r = rd.circle()
    assert (cx, cy, r) == pytest.approx((0, 0, 0.5), abs=1e-3)


def test_two_cone_fit_separates_rings():
    # internally tangent rings meeting at (0, −0.51)
    g = ring_map(257, 0.7, [(0.0, 0.02, 0.53, 0.008), (0.0, -0.06, 0.45, 0.008)])
    tc = two_cone_fit(g, (0.2, 0.68))
    assert tc.outer_circle == pytest.approx((0.0, 0.02, 0.53), abs=5e-3)
    assert tc.inner_circle == pytest.approx((0.0, -0.06, 0.45), abs=5e-3)
    assert tc.touch_point == pytest.approx((0.0, -0.51), abs=0.01)
    assert 0 < tc.merged_fraction < 0.5
