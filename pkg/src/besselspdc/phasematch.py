"""Longitudinal phase mismatch, phase-matching envelopes and the pump spectrum.

Transverse vectors are arrays whose last axis holds ``(kx, ky)`` in µm⁻¹.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .optics import DerivedIndices, PumpBeam, extraordinary_kz, ordinary_kz

#: Width of the Gaussian that best replaces sinc(x) by exp(−(γx)²).
SINC_GAUSS_GAMMA = 0.4393


@dataclass(frozen=True)
class PhaseMatchSpec:
    envelope: str = "sinc"
    gamma: float = SINC_GAUSS_GAMMA

    def __post_init__(self):
        if self.envelope not in ("sinc", "gaussian"):
            raise ValueError(f"envelope must be 'sinc' or 'gaussian', got {self.envelope!r}")
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")


@dataclass(frozen=True)
class MismatchExpansion:
    """First-order expansion ``Δk_z ≈ κ̃ − d·(k⊥ˢ + k⊥ⁱ)`` about the signal vector."""

    kappa_tilde: np.ndarray
    d: np.ndarray
    delta_kz: np.ndarray


def _vec(k):
    k = np.asarray(k, dtype=float)
    if k.shape[-1] != 2:
        raise ValueError(f"transverse vectors need a trailing axis of length 2, got {k.shape}")
    return k


def delta_kz_exact(k_signal, k_idler, indices: DerivedIndices):
    """Exact mismatch ``k_zᵖ − k_zˢ − k_zⁱ`` from the full dispersion relations.

    The pump carries the transverse momentum ``k⊥ˢ + k⊥ⁱ``.  Evanescent
    components raise :class:`~besselspdc.optics.DomainError`.
    """
    ks, ki = _vec(k_signal), _vec(k_idler)
    kp = ks + ki
    kz_p = extraordinary_kz(kp[..., 0], kp[..., 1], indices)
    kz_s = ordinary_kz(np.hypot(ks[..., 0], ks[..., 1]), indices)
    kz_i = ordinary_kz(np.hypot(ki[..., 0], ki[..., 1]), indices)
    return kz_p - kz_s - kz_i


def taylor_mismatch(k_signal, k_idler, indices: DerivedIndices) -> MismatchExpansion:
    ks, ki = _vec(k_signal), _vec(k_idler)
    curv = 2.0 / (indices.n_o_signal * indices.k0)
    kappa = indices.k0 * (indices.n_eff - indices.n_o_signal) + curv * np.sum(ks * ks, axis=-1)
    d = indices.beta * indices.axis[:2] + curv * ks
    dk = kappa - np.sum(d * (ks + ki), axis=-1)
    return MismatchExpansion(kappa_tilde=kappa, d=d, delta_kz=dk)


def pm_envelope(delta_kz, length: float, spec: PhaseMatchSpec = PhaseMatchSpec()):
    """Phase-matching amplitude at ``x = L Δk_z / 2``.

    ``sinc`` gives sin(x)/x, ``gaussian`` gives exp(−(γx)²).
    """
    x = 0.5 * length * np.asarray(delta_kz, dtype=float)
    if spec.envelope == "sinc":
        # np.sinc is normalized: sinc(t) = sin(πt)/(πt)
        return np.sinc(x / math.pi)
    return np.exp(-((spec.gamma * x) ** 2))


def pump_modulus(k_perp, pump: PumpBeam):
    """Modulus of the pump plane-wave spectrum as a function of ``|k⊥ᵖ|``.

    This is all the angular and conditional spectra need, so the OAM index
    cannot leak into them.
    """
    k_perp = np.asarray(k_perp, dtype=float)
    w2 = 2.0 * pump.width**2
    if pump.cone_radius == 0.0:
        return np.exp(-(k_perp**2) / w2)
    return np.exp(-((k_perp - pump.cone_radius) ** 2) / w2) / pump.cone_radius


def pump_spectrum(k_pump, pump: PumpBeam):
    """Bessel-Gauss pump amplitude ``exp(−(k⊥−κ)²/2W²) e^{iℓφ} / κ``.

    With ``cone_radius == 0`` the annulus collapses to a Gaussian of width W
    centred at the origin (unit peak).
    """
    kp = _vec(k_pump)
    kx, ky = kp[..., 0], kp[..., 1]
    mod = pump_modulus(np.hypot(kx, ky), pump)
    if pump.oam == 0:
        return mod.astype(complex)
    return mod * np.exp(1j * pump.oam * np.arctan2(ky, kx))
