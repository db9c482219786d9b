import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from besselspdc import CrystalConfig, PumpBeam, QuadratureSpec, derived_indices
from besselspdc.oam import (OamAmplitudeMatrix, TiltedBesselMode, _lab_samples, _modes,
                            amplitude_matrix, angular_factor, emission_cone_tilt, marginals,
                            parity_window, radial_smear, standard_geometry, tilted_dispersion,
                            tilted_frame, transition_amplitude)

IND = derived_indices(CrystalConfig(), 406.8)
K_SIGNAL = 12.820864126878371
THETA_EC = 0.037961210153962941  # mpmath oracle
PARAXIAL = PumpBeam(cone_radius=0.01, width=0.0005)
FAST = QuadratureSpec(8, 64, 1e-2, 1)

angles = st.floats(-math.pi, math.pi)
tilts = st.floats(0.0, 1.2)


@given(theta=tilts, phi=angles)
def test_frame_orthonormal_and_invertible(theta, phi):
    f = tilted_frame(theta, phi)
    assert f.matrix @ f.matrix.T == pytest.approx(np.eye(3), abs=1e-15)
    assert np.linalg.det(f.matrix) == pytest.approx(1.0, rel=1e-14)
    v = np.array([0.3, -0.2, 12.0])
    assert f.to_lab(f.to_frame(v)) == pytest.approx(v, rel=1e-14)
    assert np.linalg.norm(f.to_frame(v)) == pytest.approx(np.linalg.norm(v), rel=1e-14)


def test_untilted_frame_is_identity():
    assert tilted_frame(0.0, 0.0).matrix == pytest.approx(np.eye(3), abs=0)
    with pytest.raises(ValueError):
        tilted_frame(math.pi / 2, 0.0)


@given(phi=angles, phi_t=angles, ell=st.integers(-6, 6))
def test_angular_factor_untilted(phi, phi_t, ell):
    v = angular_factor(ell, 0.0, phi_t, phi, 12.0, 0.1)
    assert v == pytest.approx(np.exp(1j * ell * (phi - phi_t)), abs=1e-12)


@given(theta=tilts, phi=angles, phi_t=angles, ell=st.integers(1, 6))
def test_angular_factor_conjugation(theta, phi, phi_t, ell):
    a = angular_factor(ell, theta, phi_t, phi, 12.0, 0.4)
    b = angular_factor(-ell, theta, phi_t, phi, 12.0, 0.4)
    assert b == pytest.approx(np.conj(a), rel=1e-12, abs=1e-12)
    assert angular_factor(0, theta, phi_t, phi, 12.0, 0.4) == 1.0


def test_angular_factor_is_mode_phase_on_ring():
    # on the ring, factor·(k⊥/κ)^|ℓ| = e^{iℓψ} with ψ the azimuth about p3
    th, pt, kappa, ell = 0.3, 0.7, 0.2, 3
    f = tilted_frame(th, pt)
    psi = np.linspace(0, 2 * np.pi, 13)
    kz_t = math.sqrt(K_SIGNAL**2 - kappa**2)
    k = kappa * (np.cos(psi)[:, None] * f.p1 + np.sin(psi)[:, None] * f.p2) + kz_t * f.p3
    kp = np.hypot(k[:, 0], k[:, 1])
    v = angular_factor(ell, th, pt, np.arctan2(k[:, 1], k[:, 0]), k[:, 2], kp) * (kp / kappa) ** ell
    # the binomial terms are O((k_z sinθ / k⊥)^ℓ) and cancel, hence the looser tolerance
    assert v == pytest.approx(np.exp(1j * ell * psi), abs=1e-10)


@given(phi=angles, theta=st.floats(0.01, 0.6), kappa=st.floats(0.01, 2.0), branch=st.sampled_from("+-"))
def test_dispersion_on_shell(phi, theta, kappa, branch):
    k0 = IND.k0 / 2
    td = tilted_dispersion(kappa, k0, phi, theta, 0.4, IND.n_o_signal, branch)
    if td.in_domain:
        assert math.hypot(td.kz, td.k_perp) == pytest.approx(IND.n_o_signal * k0, rel=1e-10)
    else:
        assert td.kz == td.k_perp == td.jac == 0.0


def test_dispersion_untilted_reduction():
    k0 = IND.k0 / 2
    phi = np.linspace(-3, 3, 11)
    td = tilted_dispersion(0.3, k0, phi, 0.0, 0.0, IND.n_o_signal, "+", "exact")
    assert td.k_perp == pytest.approx(np.full(11, 0.3), rel=1e-12)
    assert td.kz == pytest.approx(np.full(11, math.sqrt(K_SIGNAL**2 - 0.09)), rel=1e-12)
    assert td.jac == pytest.approx(np.ones(11), rel=1e-12)
    assert td.valid.all()


def test_dispersion_argument_checks():
    with pytest.raises(ValueError):
        tilted_dispersion(0.1, 1.0, 0.0, 0.1, 0.0, 1.6, "x")
    with pytest.raises(ValueError):
        tilted_dispersion(5.0, 1.0, 0.0, 0.1, 0.0, 1.6)
    with pytest.raises(ValueError):
        tilted_dispersion(0.1, 1.0, 0.0, 0.1, 0.0, 1.6, jacobian="other")


@pytest.mark.parametrize("theta,kappa", [(THETA_EC, 0.01), (THETA_EC, 0.0001), (0.3, 0.5), (0.02, 0.5)])
def test_exact_jacobian_ring_measure(theta, kappa):
    mode = TiltedBesselMode(tilted_frame(theta, -math.pi / 2), kappa, 0, 1e-9, 813.6)
    (vecs, w, kt), = _lab_samples(mode, IND, 64, "both", 1)
    assert kt == kappa
    assert w.sum() == pytest.approx(2 * math.pi, rel=1e-9)
    # every sample lies on the mode ring
    kf = mode.frame.to_frame(vecs)
    assert np.hypot(kf[:, 0], kf[:, 1]) == pytest.approx(np.full(len(w), kappa), rel=1e-8)


def test_radial_smear_normalization():
    k, w = radial_smear(0.01, 0.0005)
    assert np.sum(w) == pytest.approx(1.0, rel=1e-12)
    k, w = radial_smear(0.0001, 0.0005)  # nodes would go negative: Legendre fallback
    assert np.all(k > 0)


def test_emission_cone_tilt():
    assert emission_cone_tilt(IND) == pytest.approx(THETA_EC, rel=1e-12)


def test_standard_geometry(bbo):
    g = standard_geometry(bbo, PARAXIAL, 1e-4, 0.01, 5e-4)
    assert (g.phi_s, g.phi_i) == (-math.pi / 2, math.pi / 2)
    assert standard_geometry(bbo, PARAXIAL, 1e-4, 0.01, 5e-4, "horizontal").phi_i == math.pi
    with pytest.raises(ValueError):
        standard_geometry(bbo, PARAXIAL, 1e-4, 0.01, 5e-4, "diagonal")


@pytest.mark.parametrize("ells", [(0, 0), (1, -1), (-2, 1)])
def test_lab_route_matches_mode_route(bbo, ells):
    g = standard_geometry(bbo, PARAXIAL, 1e-4, 0.01, 5e-4)
    s, i = _modes(g, PARAXIAL, *ells)
    q = QuadratureSpec(8, 64, 1e-3, 2)
    a = transition_amplitude(PARAXIAL, s, i, bbo, q, route="mode")
    b = transition_amplitude(PARAXIAL, s, i, bbo, q, route="lab")
    assert a.converged and b.converged
    assert abs(a.value - b.value) <= 1e-6 * abs(a.value)


def test_matrix_routes_agree_and_peak_at_origin(bbo):
    g = standard_geometry(bbo, PARAXIAL, 1e-4, 0.01, 5e-4)
    m = amplitude_matrix(PARAXIAL, g, (-3, 3), (-3, 3), bbo, FAST)
    lab = amplitude_matrix(PARAXIAL, g, (-3, 3), (-3, 3), bbo, FAST, route="lab")
    assert m.argmax() == lab.argmax() == (0, 0)
    assert lab.amplitudes == pytest.approx(m.amplitudes, abs=1e-6 * m.modulus.max())
    assert m.diagnostics["converged"]
    assert m.at(0, 0) == m.amplitudes[3, 3]


def test_single_branch_covers_part_of_ring(bbo):
    mode = TiltedBesselMode(tilted_frame(THETA_EC, -math.pi / 2), 0.01, 0, 1e-9, 813.6)
    (_, w_plus, _), = _lab_samples(mode, IND, 64, "+", 1)
    (_, w_both, _), = _lab_samples(mode, IND, 64, "both", 1)
    assert w_plus.sum() < w_both.sum()


def test_marginals_normalized():
    m = OamAmplitudeMatrix([-1, 0, 1], [0, 1], np.arange(6).reshape(3, 2) * (1 + 1j))
    ms, mi = marginals(m)
    assert ms.sum() == pytest.approx(1.0) and mi.sum() == pytest.approx(1.0)
    with pytest.raises(ValueError):
        marginals(OamAmplitudeMatrix([0], [0], np.zeros((1, 1))))
    with pytest.raises(ValueError):
        OamAmplitudeMatrix([0, 1], [0], np.zeros((1, 1)))


def test_indicator_matrix():
    amp = np.zeros((5, 5), complex)
    amp[3, 1] = 2j
    m = OamAmplitudeMatrix(np.arange(-2, 3), np.arange(-2, 3), amp)
    assert m.argmax() == (1, -1)
    assert m.normalized().max() == 1.0
    ms, mi = marginals(m)
    assert ms.tolist() == [0, 0, 0, 1, 0] and mi.tolist() == [0, 1, 0, 0, 0]


def test_parity_window():
    assert parity_window([1, 3, 2, 4, 3, 5]) == 6
    assert parity_window([1, 2, 3, 4]) == 0
    assert parity_window([0, 0, 1, 3, 2, 2.5, 0]) == 4
    # tails below the floor do not count
    assert parity_window([1e-9, 2e-9, 1e-9, 1.0, 2.0, 3.0]) == 0
