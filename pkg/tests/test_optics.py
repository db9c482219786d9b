import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from besselspdc import CrystalConfig, DomainError, PumpBeam, derived_indices
from besselspdc.optics import (chi_contraction, extraordinary_kz, optical_axis, ordinary_kz,
                               polarization_vector, sellmeier_index)

# frozen from tests/oracles/indices_mpmath.py (40-digit evaluation)
N_O_SIGNAL = 1.6601539734486302
N_O_PUMP = 1.6915033113146381
N_E_PUMP = 1.5668568270489704
N_EFF = 1.6589583625998879
BETA = -0.13877036826069170
ETA = 0.39180199131475653
WALKOFF = -0.067911783049507581
K_SIGNAL = 12.820864126878371
KZ_O_049 = 12.811497061619173
KZ_E_005 = 25.626604561755426


def test_sellmeier_reference_values():
    assert sellmeier_index(CrystalConfig().sellmeier_ordinary, 0.4068) == pytest.approx(N_O_PUMP, rel=1e-14)
    assert sellmeier_index(CrystalConfig().sellmeier_ordinary, 0.8136) == pytest.approx(N_O_SIGNAL, rel=1e-14)
    # rounded values quoted for BBO at these wavelengths
    assert sellmeier_index(CrystalConfig().sellmeier_ordinary, 0.4068) == pytest.approx(1.693, abs=2e-3)
    assert sellmeier_index(CrystalConfig().sellmeier_ordinary, 0.8136) == pytest.approx(1.661, abs=1e-3)


@given(st.floats(0.3, 1.2))
def test_dispersionless_set(lam):
    assert sellmeier_index((2.25,), lam) == 1.5


@pytest.mark.parametrize("lam", [0.2, 1.5])
def test_sellmeier_window(lam):
    with pytest.raises(DomainError):
        sellmeier_index((2.25,), lam)


def test_derived_indices_reference(ind):
    assert ind.n_o_signal == pytest.approx(N_O_SIGNAL, rel=1e-14)
    assert ind.n_e_pump == pytest.approx(N_E_PUMP, rel=1e-14)
    assert ind.n_eff == pytest.approx(N_EFF, rel=1e-14)
    assert ind.beta == pytest.approx(BETA, rel=1e-13)
    assert ind.eta == pytest.approx(ETA, rel=1e-14)
    assert ind.walkoff == pytest.approx(WALKOFF, rel=1e-13)
    assert ind.k_signal == pytest.approx(K_SIGNAL, rel=1e-14)


def test_walkoff_quoted_value(ind):
    assert abs(ind.walkoff) == pytest.approx(0.068, abs=0.005)


def test_isotropic_medium():
    iso = CrystalConfig(sellmeier_ordinary=(2.25,), sellmeier_extraordinary=(2.25,))
    d = derived_indices(iso, 406.8)
    assert d.n_eff == pytest.approx(1.5, rel=1e-15)
    assert d.beta == 0.0
    assert d.eta == pytest.approx(1 / 2.25, rel=1e-15)


def test_axis_along_normal_removes_walkoff():
    d = derived_indices(CrystalConfig(axis_polar=0.0), 406.8)
    assert d.walkoff == 0.0
    assert d.beta == pytest.approx((N_E_PUMP**2 - N_O_PUMP**2) / N_E_PUMP**2, rel=1e-13)
    assert d.n_eff == pytest.approx(d.n_o_pump, rel=1e-15)


def test_default_axis_in_yz_plane(bbo):
    a = bbo.axis
    assert abs(a[0]) < 1e-15
    assert a[1:] == pytest.approx([0.49, 0.87], abs=5e-3)


def test_ordinary_kz(ind):
    assert ordinary_kz(0.0, ind) == pytest.approx(K_SIGNAL, rel=1e-15)
    assert ordinary_kz(0.49, ind) == pytest.approx(KZ_O_049, rel=1e-14)
    assert ordinary_kz(ind.k_signal, ind) == 0.0
    with pytest.raises(DomainError):
        ordinary_kz(ind.k_signal * 1.0001, ind)


@given(frac=st.floats(0.0, 0.999))
def test_ordinary_shell(frac, ind):
    kp = frac * ind.k_signal
    kz = ordinary_kz(kp, ind)
    assert math.hypot(kp, kz) / (ind.k0 / 2) == pytest.approx(ind.n_o_signal, rel=1e-12)


def test_extraordinary_kz(ind):
    assert extraordinary_kz(0.0, 0.0, ind) == pytest.approx(ind.n_eff * ind.k0, rel=1e-12)
    assert extraordinary_kz(0.0, 0.05, ind) == pytest.approx(KZ_E_005, rel=1e-14)
    # along x the axis projection vanishes: no walk-off shift
    kx = 0.3
    plain = ind.k0 * ind.n_eff * math.sqrt(1 - kx * kx * ind.eta / ind.k0**2)
    assert extraordinary_kz(kx, 0.0, ind) == pytest.approx(plain, rel=1e-15)
    with pytest.raises(DomainError):
        extraordinary_kz(100.0, 0.0, ind)


@given(st.floats(-1.0, 1.0), st.floats(-1.0, 1.0), st.floats(0.0, 1.5))
def test_isotropic_limit_of_extraordinary(kx, ky, theta):
    iso = CrystalConfig(sellmeier_ordinary=(2.4,), sellmeier_extraordinary=(2.4,), axis_polar=theta)
    d = derived_indices(iso, 406.8)
    ref = math.sqrt(2.4 * d.k0**2 - kx * kx - ky * ky)
    assert extraordinary_kz(kx, ky, d) == pytest.approx(ref, rel=1e-10)


@given(kx=st.floats(-2, 2), ky=st.floats(-2, 2), kz=st.floats(5, 13))
def test_ordinary_polarization_orthogonal(kx, ky, kz, bbo):
    k = np.array([kx, ky, kz])
    e = polarization_vector(k, bbo, "ordinary")
    assert abs(e @ bbo.axis) <= 1e-12 * np.linalg.norm(e)
    assert abs(e @ k) <= 1e-12 * np.linalg.norm(e) * np.linalg.norm(k)


def test_polarization_examples():
    c = CrystalConfig(axis_polar=math.pi / 2, axis_azimuth=math.pi / 2)  # a = ŷ
    e = polarization_vector([0, 0, 1.0], c, "ordinary")
    assert e / np.linalg.norm(e) == pytest.approx([1, 0, 0], abs=1e-15)
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        assert not np.any(polarization_vector([0, 3.0, 0], c, "ordinary"))
    assert w
    k_perp_a = np.array([2.0, 0.0, 5.0])
    assert polarization_vector(k_perp_a, c, "extraordinary", 406.8) == pytest.approx(c.axis, abs=1e-15)
    with pytest.raises(DomainError):
        polarization_vector([0, 0, 0], c, "ordinary")


def test_optical_axis_unit():
    for th, ph in [(0.1, 0.2), (1.2, -2.0), (0.0, 3.0)]:
        assert np.linalg.norm(optical_axis(th, ph)) == pytest.approx(1.0, rel=1e-15)


def test_chi_effective_is_one(bbo):
    assert chi_contraction([1, 2, 3], [0, 1, 2], [2, 1, 0], bbo) == 1.0


def test_chi_vectorial_on_axis(bbo, ind):
    z = np.array([0, 0, 1.0])
    v = chi_contraction(ind.n_eff * ind.k0 * z, ind.k_signal * z, ind.k_signal * z, bbo, "vectorial", ind)
    assert v == pytest.approx(1.0, rel=1e-14)
    # small transverse momenta change it only at second order
    def dev(delta):
        kz = math.sqrt(ind.k_signal**2 - delta**2)
        ks, ki = np.array([delta, 0.0, kz]), np.array([-delta, 0.0, kz])
        return chi_contraction(ks + ki, ks, ki, bbo, "vectorial", ind)

    base = dev(0.0)
    assert (dev(0.02) - base) / (dev(0.01) - base) == pytest.approx(4.0, rel=1e-2)


@given(t=st.lists(st.floats(-0.5, 0.5), min_size=4, max_size=4))
def test_chi_vectorial_signal_idler_symmetric(t, bbo, ind):
    ks = np.array([t[0], t[1], math.sqrt(ind.k_signal**2 - t[0] ** 2 - t[1] ** 2)])
    ki = np.array([t[2], t[3], math.sqrt(ind.k_signal**2 - t[2] ** 2 - t[3] ** 2)])
    kp = ks + ki
    a = chi_contraction(kp, ks, ki, bbo, "vectorial", ind)
    b = chi_contraction(kp, ki, ks, bbo, "vectorial", ind)
    assert a == pytest.approx(b, rel=1e-12, abs=1e-15)


def test_pump_validation():
    with pytest.raises(ValueError):
        PumpBeam(width=0.0)
    with pytest.raises(ValueError):
        PumpBeam(cone_radius=-1.0)
    with pytest.warns(UserWarning):
        PumpBeam(cone_radius=0.001, width=0.0007)
    assert PumpBeam(wavelength=406.8).k0 == pytest.approx(2 * math.pi / 0.4068, rel=1e-15)


def test_crystal_validation():
    with pytest.raises(ValueError):
        CrystalConfig(length=0.0)
    with pytest.raises(ValueError):
        CrystalConfig(axis_polar=2.0)
