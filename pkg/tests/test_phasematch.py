import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from besselspdc import CrystalConfig, PhaseMatchSpec, PumpBeam, derived_indices
from besselspdc.phasematch import (delta_kz_exact, pm_envelope, pump_modulus, pump_spectrum,
                                   taylor_mismatch)

IND = derived_indices(CrystalConfig(), 406.8)
EXACT_CONE = 0.48649101949702578  # root of Δk_z(k, −k) = 0 along x, mpmath oracle
ENVELOPE_AT_PI = 0.14887018835746772  # exp(−(0.4393 π)²)

small = st.floats(-0.1, 0.1)


def test_collinear_mismatch():
    dk = delta_kz_exact([0.0, 0.0], [0.0, 0.0], IND)
    assert dk == pytest.approx(IND.k0 * (IND.n_eff - IND.n_o_signal), rel=1e-9)
    assert dk < 0


def test_exact_cone_root():
    assert abs(delta_kz_exact([EXACT_CONE, 0.0], [-EXACT_CONE, 0.0], IND)) < 1e-12


def test_taylor_cone_radius_close_to_exact():
    r = math.sqrt(0.5 * (IND.n_o_signal * IND.k0) ** 2 * (1 - IND.n_eff / IND.n_o_signal))
    t = taylor_mismatch([r, 0.0], [-r, 0.0], IND)
    assert abs(float(t.delta_kz)) < 1e-12
    assert r == pytest.approx(EXACT_CONE, rel=5e-4)


@given(sx=st.floats(-0.35, 0.35), sy=st.floats(-0.35, 0.35), px=small, py=small)
def test_taylor_agrees_with_exact_for_small_pump_momentum(sx, sy, px, py):
    # the linearization error grows like |k⊥ˢ + k⊥ⁱ|², measured against |κ̃| on axis
    if math.hypot(px, py) > 0.1:
        px, py = 0.05, -0.05
    ks, ki = [sx, sy], [px - sx, py - sy]
    exact = delta_kz_exact(ks, ki, IND)
    approx = taylor_mismatch(ks, ki, IND).delta_kz
    scale = abs(IND.k0 * (IND.n_eff - IND.n_o_signal))
    assert abs(approx - exact) <= 0.02 * scale


def test_taylor_error_is_quadratic_in_pump_momentum():
    def err(p):
        ks, ki = [0.2, 0.1], [p - 0.2, -0.1]
        return abs(delta_kz_exact(ks, ki, IND) - taylor_mismatch(ks, ki, IND).delta_kz)

    assert err(0.08) / err(0.04) == pytest.approx(4.0, rel=0.05)


def test_vectorized_shapes():
    ks = np.zeros((3, 4, 2))
    assert delta_kz_exact(ks, ks, IND).shape == (3, 4)
    with pytest.raises(ValueError):
        delta_kz_exact(np.zeros(3), np.zeros(3), IND)


@given(x=st.floats(-50, 50))
def test_envelopes_even(x):
    for spec in (PhaseMatchSpec("sinc"), PhaseMatchSpec("gaussian")):
        assert pm_envelope(x, 1.0, spec) == pm_envelope(-x, 1.0, spec)


def test_envelope_values():
    # x = L Δk / 2 = π
    assert pm_envelope(2 * math.pi, 1.0, PhaseMatchSpec("gaussian")) == pytest.approx(ENVELOPE_AT_PI, rel=1e-14)
    assert abs(pm_envelope(2 * math.pi, 1.0, PhaseMatchSpec("sinc"))) < 1e-15
    assert pm_envelope(0.0, 1000.0) == 1.0
    with pytest.raises(ValueError):
        PhaseMatchSpec("lorentzian")


@given(k=st.floats(0, 0.2), ell=st.integers(-10, 10))
def test_pump_modulus_independent_of_oam(k, ell):
    p0 = PumpBeam(oam=0)
    p = PumpBeam(oam=ell)
    v = np.array([k * 0.6, k * 0.8])
    assert abs(pump_spectrum(v, p)) == pytest.approx(abs(pump_spectrum(v, p0)), rel=1e-14, abs=1e-300)


def test_pump_annulus_shape(pump):
    k, w = pump.cone_radius, pump.width
    assert pump_modulus(k, pump) == pytest.approx(1 / k, rel=1e-15)
    # intensity e^-2 at two widths from the ring
    assert (pump_modulus(k + 2 * w, pump) * k) ** 2 == pytest.approx(math.exp(-4), rel=1e-12)
    gauss = PumpBeam(cone_radius=0.0, width=0.01)
    assert pump_modulus(0.0, gauss) == 1.0


def test_pump_phase_winds_with_oam():
    p = PumpBeam(oam=3)
    a = pump_spectrum([0.05, 0.0], p)
    b = pump_spectrum([0.0, 0.05], p)
    assert b / a == pytest.approx(np.exp(1.5j * math.pi), rel=1e-12)
