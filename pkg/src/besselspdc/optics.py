"""Uniaxial crystal model, pump beam description and mode polarizations.

Units throughout the package: lengths in µm, wave numbers in µm⁻¹, angles in
radians.  Frequencies are carried as vacuum wave numbers ``k0 = 2π/λ`` so the
speed of light never appears explicitly.  Wavelengths of beams are stored in
nm because that is how they are quoted in the lab.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

#: Supported wavelength window for Sellmeier evaluation, µm.
SELLMEIER_WINDOW = (0.3, 1.2)

#: Eimerl et al. (1987) BBO coefficients, n² = A + B/(λ² − C) − D·λ², λ in µm.
BBO_ORDINARY = (2.7359, 0.01878, 0.01822, 0.01354)
BBO_EXTRAORDINARY = (2.3753, 0.01224, 0.01667, 0.01516)


class DomainError(ValueError):
    """An input lies outside the region where a formula is real or valid."""


def sellmeier_index(coeffs: Sequence[float], wavelength_um: float) -> float:
    """Refractive index from a four-term Sellmeier set.

    ``n² = A + B/(λ² − C) − D·λ²``.  Shorter coefficient lists are padded with
    zeros, so ``(2.25,)`` describes a dispersionless medium of index 1.5.
    """
    lo, hi = SELLMEIER_WINDOW
    if not lo <= wavelength_um <= hi:
        raise DomainError(
            f"wavelength {wavelength_um} µm outside Sellmeier window [{lo}, {hi}] µm"
        )
    a, b, c, d = (tuple(coeffs) + (0.0, 0.0, 0.0, 0.0))[:4]
    lam2 = wavelength_um * wavelength_um
    n2 = a - d * lam2
    if b != 0.0:
        n2 += b / (lam2 - c)
    if n2 <= 1.0:
        raise DomainError(f"Sellmeier set gives n² = {n2} ≤ 1 at {wavelength_um} µm")
    return math.sqrt(n2)


def optical_axis(theta_a: float, phi_a: float) -> np.ndarray:
    """Unit optical-axis vector ``(sinθ cosφ, sinθ sinφ, cosθ)``.

    ``phi_a = π/2`` puts the axis in the Y-Z plane, ``a = (0, sinθ, cosθ)``.
    """
    st = math.sin(theta_a)
    return np.array([st * math.cos(phi_a), st * math.sin(phi_a), math.cos(theta_a)])


@dataclass(frozen=True)
class CrystalConfig:
    """Uniaxial nonlinear crystal.

    Parameters
    ----------
    sellmeier_ordinary, sellmeier_extraordinary : tuple of float
        ``(A, B, C, D)`` coefficients, λ in µm.
    axis_polar : float
        Angle θ_a between optical axis and the crystal normal (ẑ), radians.
    axis_azimuth : float
        Azimuth φ_a of the optical axis about ẑ, radians.
    length : float
        Crystal length L along ẑ, µm.
    d22 : float
        Nonlinear coefficient, pm/V.  Only enters the vectorial χ contraction,
        where it cancels after normalization.
    """

    sellmeier_ordinary: tuple = BBO_ORDINARY
    sellmeier_extraordinary: tuple = BBO_EXTRAORDINARY
    axis_polar: float = math.radians(29.3)
    axis_azimuth: float = math.pi / 2
    length: float = 1000.0
    d22: float = 2.2

    def __post_init__(self):
        object.__setattr__(self, "sellmeier_ordinary", tuple(float(c) for c in self.sellmeier_ordinary))
        object.__setattr__(
            self, "sellmeier_extraordinary", tuple(float(c) for c in self.sellmeier_extraordinary)
        )
        if not 0.0 <= self.axis_polar <= math.pi / 2:
            raise ValueError(f"axis_polar must lie in [0, π/2], got {self.axis_polar}")
        if self.length <= 0:
            raise ValueError(f"crystal length must be positive, got {self.length}")

    @property
    def axis(self) -> np.ndarray:
        return optical_axis(self.axis_polar, self.axis_azimuth)

    def n_o(self, wavelength_um: float) -> float:
        return sellmeier_index(self.sellmeier_ordinary, wavelength_um)

    def n_e(self, wavelength_um: float) -> float:
        return sellmeier_index(self.sellmeier_extraordinary, wavelength_um)


@dataclass(frozen=True)
class PumpBeam:
    """Bessel-Gauss pump.

    The plane-wave spectrum is a Gaussian annulus of radius ``cone_radius``
    and width ``width`` carrying the phase ``exp(iℓφ)``.  A zero cone radius
    degenerates to a Gaussian beam of the same spectral width.
    """

    wavelength: float = 406.8  # nm
    cone_radius: float = 0.05  # µm⁻¹
    width: float = 0.0007  # µm⁻¹
    oam: int = 0
    amplitude: float = 1.0

    def __post_init__(self):
        if self.width <= 0:
            raise ValueError(f"annulus width must be positive, got {self.width}")
        if self.cone_radius < 0:
            raise ValueError(f"cone radius must be non-negative, got {self.cone_radius}")
        if self.wavelength <= 0:
            raise ValueError(f"wavelength must be positive, got {self.wavelength}")
        object.__setattr__(self, "oam", int(self.oam))
        if 0 < self.cone_radius < 5 * self.width:
            warnings.warn(
                f"annulus width {self.width} is not small against the cone radius "
                f"{self.cone_radius}; the Bessel-Gauss picture is marginal",
                stacklevel=2,
            )

    @property
    def k0(self) -> float:
        """Vacuum wave number of the pump, µm⁻¹."""
        return 2 * math.pi / (self.wavelength * 1e-3)


@dataclass(frozen=True)
class DerivedIndices:
    """Indices and extraordinary-wave coefficients at the degenerate point.

    ``n_o_signal`` is evaluated at twice the pump wavelength, everything else
    at the pump wavelength.  ``k0`` is the pump vacuum wave number.
    """

    n_o_signal: float
    n_o_pump: float
    n_e_pump: float
    n_eff: float
    beta: float
    eta: float
    k0: float
    axis: np.ndarray = field(repr=False, compare=False)

    @property
    def delta_eps(self) -> float:
        return self.n_e_pump**2 - self.n_o_pump**2

    @property
    def walkoff(self) -> float:
        """Signed walk-off angle estimate ``β·a_y`` (radians)."""
        return self.beta * float(self.axis[1])

    @property
    def k_signal(self) -> float:
        """Wave-vector magnitude of a degenerate ordinary photon, ``n_o k0 / 2``."""
        return self.n_o_signal * self.k0 / 2


def derived_indices(crystal: CrystalConfig, pump_wavelength_nm: float) -> DerivedIndices:
    lam_p = pump_wavelength_nm * 1e-3
    n_o_p = crystal.n_o(lam_p)
    n_e_p = crystal.n_e(lam_p)
    n_o_s = crystal.n_o(2 * lam_p)
    eps_perp = n_o_p**2
    eps_par = n_e_p**2
    d_eps = eps_par - eps_perp
    a = crystal.axis
    denom = eps_perp + d_eps * a[2] ** 2
    return DerivedIndices(
        n_o_signal=n_o_s,
        n_o_pump=n_o_p,
        n_e_pump=n_e_p,
        n_eff=math.sqrt(eps_perp * eps_par / denom),
        beta=d_eps * a[2] / denom,
        eta=1.0 / denom,
        k0=2 * math.pi / lam_p,
        axis=a,
    )


def ordinary_kz(k_perp, indices: DerivedIndices):
    """Longitudinal wave number of a degenerate ordinary photon.

    ``k_perp`` is the transverse magnitude (scalar or array).  Raises
    :class:`DomainError` for evanescent input.
    """
    k = indices.k_signal
    rad = k * k - np.square(k_perp)
    if np.any(rad < 0):
        raise DomainError("transverse wave number exceeds the ordinary shell (evanescent)")
    return np.sqrt(rad)


def extraordinary_kz(kx, ky, indices: DerivedIndices):
    """Pump longitudinal wave number from the walk-off dispersion relation.

    ``k_z = −β (a·k⊥) + k0 n_eff sqrt(1 − η k⊥²/k0²)``.
    """
    k0 = indices.k0
    kx = np.asarray(kx, dtype=float)
    ky = np.asarray(ky, dtype=float)
    rad = 1.0 - (kx * kx + ky * ky) * indices.eta / (k0 * k0)
    if np.any(rad < 0):
        raise DomainError("transverse wave number outside the extraordinary shell")
    a = indices.axis
    kz = -indices.beta * (a[0] * kx + a[1] * ky) + k0 * indices.n_eff * np.sqrt(rad)
    return kz if kz.ndim else float(kz)


def polarization_vector(k, crystal: CrystalConfig, branch: str, wavelength_nm: float | None = None):
    """Unnormalized electric-field direction of an ordinary or extraordinary mode.

    ordinary: ``a × k``.  extraordinary: ``a − k (a·k) / (ε⊥ k0²)`` with ε⊥ and
    k0 taken at the mode's own wavelength (required for that branch).
    A wave vector parallel to the axis has no ordinary polarization; a zero
    vector is returned with a warning.
    """
    k = np.asarray(k, dtype=float)
    if not np.any(k):
        raise DomainError("polarization undefined for a zero wave vector")
    a = crystal.axis
    if branch == "ordinary":
        e = np.cross(a, k)
        if np.linalg.norm(e) <= 1e-12 * np.linalg.norm(k):
            warnings.warn("wave vector parallel to the optical axis: ordinary mode degenerate",
                          stacklevel=2)
            return np.zeros(3)
        return e
    if branch == "extraordinary":
        if wavelength_nm is None:
            raise ValueError("extraordinary polarization needs the mode wavelength")
        lam = wavelength_nm * 1e-3
        eps_perp = crystal.n_o(lam) ** 2
        k0 = 2 * math.pi / lam
        return a - k * float(a @ k) / (eps_perp * k0 * k0)
    raise ValueError(f"unknown branch {branch!r}")


def _crystal_frame(crystal: CrystalConfig) -> np.ndarray:
    # rows are the crystal axes (x̃, ỹ, z̃ = a) in the lab frame; ỹ is the
    # projection of the lab normal, i.e. the usual φ = 90° type-I BBO cut
    th, ph = crystal.axis_polar, crystal.axis_azimuth
    ct, st, cp, sp = math.cos(th), math.sin(th), math.cos(ph), math.sin(ph)
    return np.array([
        [-sp, cp, 0.0],
        [-ct * cp, -ct * sp, st],
        [st * cp, st * sp, ct],
    ])


def _d22_bracket(kp, ks, ki, rot):
    p, s, i = rot @ kp, rot @ ks, rot @ ki
    return p[2] * ((-s[1] * i[0] - s[0] * i[1]) * p[0] + (s[1] * i[1] - s[0] * i[0]) * p[1])


def chi_contraction(kp, ks, ki, crystal: CrystalConfig, mode: str = "effective",
                    indices: DerivedIndices | None = None) -> float:
    """Nonlinear coupling factor for a pump/signal/idler wave-vector triple.

    ``mode="effective"`` returns 1 (the scalar treatment).  ``"vectorial"``
    evaluates the d22 contraction for BBO with the wave vectors rotated into
    the crystal frame, divided by its value for the collinear on-axis
    degenerate triple so that both modes share the same scale.
    """
    if mode == "effective":
        return 1.0
    if mode != "vectorial":
        raise ValueError(f"unknown χ mode {mode!r}")
    if indices is None:
        raise ValueError("vectorial χ contraction needs the derived indices")
    rot = _crystal_frame(crystal)
    # ω_s ω_i / c² scales with |k_s||k_i| at fixed index
    scale = np.linalg.norm(ks) * np.linalg.norm(ki)
    value = -crystal.d22 * scale * _d22_bracket(np.asarray(kp, float), np.asarray(ks, float),
                                                np.asarray(ki, float), rot)
    kz_s = indices.k_signal
    z = np.array([0.0, 0.0, 1.0])
    ref = -crystal.d22 * kz_s * kz_s * _d22_bracket(indices.n_eff * indices.k0 * z, kz_s * z,
                                                     kz_s * z, rot)
    if ref == 0.0:
        raise DomainError("collinear reference contraction vanishes for this axis orientation")
    return float(value / ref)
