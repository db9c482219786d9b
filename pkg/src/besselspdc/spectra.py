"""Angular spectrum (AS) and conditional angular spectrum (CAS) of degenerate
type-I down-conversion pumped by a Bessel-Gauss beam.

Both spectra are available from full quadrature over the exact dispersion
relations and from the Gaussian-envelope closed forms.  Maps live on
:class:`SpectrumGrid`, whose ``values[iy, ix]`` has ``ky`` ascending with
``iy``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .optics import CrystalConfig, DerivedIndices, DomainError, PumpBeam, derived_indices
from .phasematch import (
    SINC_GAUSS_GAMMA,
    PhaseMatchSpec,
    pm_envelope,
    pump_modulus,
    taylor_mismatch,
)
from .quad import QuadratureSpec, gauss_legendre, parallel_cell_map

#: Pump annulus half-width, in units of W, kept by the AS inner integral.
ANNULUS_HALF_WIDTH = 6.0


@dataclass(frozen=True)
class GridSpec:
    nx: int = 256
    ny: int = 256
    kx_range: tuple = (-0.7, 0.7)
    ky_range: tuple = (-0.7, 0.7)

    def __post_init__(self):
        if self.nx < 2 or self.ny < 2:
            raise ValueError("grids need at least 2 nodes per axis")
        for lo, hi in (self.kx_range, self.ky_range):
            if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
                raise ValueError(f"bad grid range ({lo}, {hi})")

    @property
    def kx(self):
        return np.linspace(*self.kx_range, self.nx)

    @property
    def ky(self):
        return np.linspace(*self.ky_range, self.ny)

    @property
    def spacing(self):
        return ((self.kx_range[1] - self.kx_range[0]) / (self.nx - 1),
                (self.ky_range[1] - self.ky_range[0]) / (self.ny - 1))

    def points(self):
        """Array of shape (ny, nx, 2) with the (kx, ky) of every node."""
        kx, ky = np.meshgrid(self.kx, self.ky)
        return np.stack([kx, ky], axis=-1)


@dataclass
class SpectrumGrid:
    """Non-negative scalar map on a regular (kx, ky) node grid, µm⁻¹."""

    kx_range: tuple
    ky_range: tuple
    values: np.ndarray
    diagnostics: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        self.kx_range = tuple(float(v) for v in self.kx_range)
        self.ky_range = tuple(float(v) for v in self.ky_range)
        GridSpec(self.nx, self.ny, self.kx_range, self.ky_range)  # validates
        if not np.all(np.isfinite(self.values)) or np.any(self.values < 0):
            raise ValueError("spectrum values must be finite and non-negative")

    @property
    def ny(self) -> int:
        return self.values.shape[0]

    @property
    def nx(self) -> int:
        return self.values.shape[1]

    @property
    def spec(self) -> GridSpec:
        return GridSpec(self.nx, self.ny, self.kx_range, self.ky_range)

    @property
    def kx(self):
        return self.spec.kx

    @property
    def ky(self):
        return self.spec.ky

    def __eq__(self, other):
        if not isinstance(other, SpectrumGrid):
            return NotImplemented
        return (self.kx_range == other.kx_range and self.ky_range == other.ky_range
                and self.values.shape == other.values.shape
                and self.values.tobytes() == other.values.tobytes())


@dataclass(frozen=True)
class NoRealCone:
    """Returned instead of a map when the crystal cannot phase-match (n_eff ≥ n_o)."""

    n_eff: float
    n_o: float
    r_as_squared: float
    reason: str = "n_eff >= n_o: collinear mismatch has the wrong sign, no emission cone"


@dataclass(frozen=True)
class ConeGeometry:
    """Emission-cone radius and the two displaced cones of a conical pump.

    ``sigma_as`` is the quartic width parameter of the AS ring (µm⁻²);
    ``cone_width = sqrt(sigma_as)`` is the corresponding transverse width.
    ``walkoff_radius`` is ``n_o k0 β a_y / 2``, the lever arm of the walk-off
    in the cone formulas.
    """

    r_as: float
    sigma_as: float
    cone_width: float
    r_plus: float
    r_minus: float
    a_plus: float
    a_minus: float
    walkoff_radius: float


def r_as_squared(indices: DerivedIndices) -> float:
    n_o, k0 = indices.n_o_signal, indices.k0
    return 0.5 * (n_o * k0) ** 2 * (1.0 - indices.n_eff / n_o)


def cone_geometry(crystal: CrystalConfig, pump: PumpBeam, length: float | None = None,
                  gamma: float = SINC_GAUSS_GAMMA) -> ConeGeometry:
    ind = derived_indices(crystal, pump.wavelength)
    r2 = r_as_squared(ind)
    if r2 <= 0:
        raise DomainError(f"n_eff = {ind.n_eff:.6f} ≥ n_o = {ind.n_o_signal:.6f}: no real emission cone")
    r = math.sqrt(r2)
    L = crystal.length if length is None else length
    nk = ind.n_o_signal * ind.k0
    sigma = nk / (math.sqrt(2.0) * gamma * L)
    b = float(nk * ind.beta * ind.axis[1] / 2)
    kap = pump.cone_radius
    if not (abs(b) > 0.5 * r and kap < 0.3 * r):
        warnings.warn("displaced-cone estimates assume |n_o k0 β a_y/2| ~ r_AS >> κ", stacklevel=2)
    shift = 0.5 * kap * (1 + b / r - kap / (2 * r))
    return ConeGeometry(
        r_as=r,
        sigma_as=sigma,
        cone_width=math.sqrt(sigma),
        r_plus=r - shift,
        r_minus=r - 0.5 * kap * (1 - b / r + kap / (2 * r)),
        a_plus=-shift,
        a_minus=shift,
        walkoff_radius=b,
    )


# ---------------------------------------------------------------- numeric AS

def _as_levels(ind, pump, quad):
    kap, w = pump.cone_radius, pump.width
    lo = max(0.0, kap - ANNULUS_HALF_WIDTH * w)
    hi = kap + ANNULUS_HALF_WIDTH * w
    levels = []
    for j in range(quad.max_doublings + 1):
        nr, na = quad.level(j)
        r, wr = gauss_legendre(nr, lo, hi)
        rw = wr * r * pump_modulus(r, pump) ** 2
        levels.append(_kernels.as_tables(r, rw, na, ind))
    return levels


def as_numeric(grid: GridSpec, crystal: CrystalConfig, pump: PumpBeam,
               quad: QuadratureSpec = QuadratureSpec(),
               pm: PhaseMatchSpec = PhaseMatchSpec("sinc"),
               workers: int | None = None, progress=None) -> SpectrumGrid:
    """Angular spectrum from full quadrature over the pump annulus.

    For each signal vector the idler is integrated out by substituting the
    pump vector ``k⊥ᵖ = k⊥ˢ + k⊥ⁱ`` and integrating ``|ψ̃(k⊥ᵖ)|² env²`` over
    ``|k⊥ᵖ| ∈ [κ − 6W, κ + 6W]``, with the mismatch taken from the exact
    dispersion relations.  Only the pump modulus enters, so the result does
    not depend on the pump OAM.

    ``diagnostics`` holds per-cell error estimates, convergence flags, the
    value at the previous quadrature level and any failed cells.
    """
    ind = derived_indices(crystal, pump.wavelength)
    levels = _as_levels(ind, pump, quad)
    ksig2 = ind.k_signal**2
    half_l = 0.5 * crystal.length
    mode = _kernels.SINC if pm.envelope == "sinc" else _kernels.GAUSSIAN
    pts = grid.points().reshape(-1, 2)

    def cell(i):
        ksx, ksy = pts[i]
        q = ksig2 - ksx * ksx - ksy * ksy
        if q <= 0:
            raise DomainError(f"signal vector ({ksx}, {ksy}) is evanescent")
        kz_s = math.sqrt(q)
        coarse = _kernels.as_cell(ksx, ksy, kz_s, *levels[0], ksig2, half_l, mode, pm.gamma)
        for j in range(1, len(levels)):
            fine = _kernels.as_cell(ksx, ksy, kz_s, *levels[j], ksig2, half_l, mode, pm.gamma)
            if quad.accept(fine, coarse):
                return fine, abs(fine - coarse), True, coarse
            if j < len(levels) - 1:
                coarse = fine
        return fine, abs(fine - coarse), False, coarse

    res = parallel_cell_map(cell, range(len(pts)), workers=workers, progress=progress)
    vals = np.zeros(len(pts))
    err = np.full(len(pts), np.nan)
    conv = np.zeros(len(pts), dtype=bool)
    coarse = np.zeros(len(pts))
    for i, v in enumerate(res.values):
        if v is not None:
            vals[i], err[i], conv[i], coarse[i] = v
    shape = (grid.ny, grid.nx)
    diag = {
        "method": "numeric",
        "envelope": pm.envelope,
        "error": err.reshape(shape),
        "converged": conv.reshape(shape),
        "coarse": coarse.reshape(shape),
        "failed": res.errors,
        "quadrature": quad,
    }
    return SpectrumGrid(grid.kx_range, grid.ky_range, vals.reshape(shape), diag)


# --------------------------------------------------------------- analytic AS

def _periodic_gauss_integral(d_kappa, kt, gl2, n):
    # ∫_0^{2π} exp(−(γL)²/2 (|d|κ sinφ − κ̃)²) dφ by the periodic trapezoid;
    # the rotation of the φ origin by arccos(d_x/|d|) leaves a full-period
    # integral unchanged, so it is not applied explicitly.
    phi = 2 * np.pi * np.arange(n) / n
    s = np.sin(phi)
    out = np.empty(d_kappa.shape)
    step = 4096
    for a in range(0, d_kappa.size, step):
        arg = d_kappa[a:a + step, None] * s[None, :] - kt[a:a + step, None]
        out[a:a + step] = np.exp(-0.5 * gl2 * arg * arg).sum(axis=1) * (2 * np.pi / n)
    return out


def as_analytic(grid: GridSpec, crystal: CrystalConfig, pump: PumpBeam,
                n_phi: int = 256, gamma: float = SINC_GAUSS_GAMMA, rel_tol: float = 1e-2,
                radial_prefactor: bool = True):
    """Single-integral approximation of the angular spectrum.

    Gaussian envelope, linearized mismatch and the thin-annulus limit W → 0::

        R(k) = exp(−σ⁻² (k² − r_AS²)²) ∫ exp(−(γL)²/2 (|d| κ sinφ − κ̃)²) dφ

    with ``σ⁻² = 2 (γ L / n_o k0)²``.  The exponential prefactor is the κ̃²
    term of the integrand pulled out in front, so it appears twice;
    ``radial_prefactor=False`` drops the duplicate.  Returns
    :class:`NoRealCone` for crystals with ``n_eff ≥ n_o``.
    """
    ind = derived_indices(crystal, pump.wavelength)
    r2 = r_as_squared(ind)
    if r2 <= 0:
        return NoRealCone(ind.n_eff, ind.n_o_signal, r2)
    pts = grid.points().reshape(-1, 2)
    tm = taylor_mismatch(pts, -pts, ind)
    d_kappa = np.hypot(tm.d[:, 0], tm.d[:, 1]) * pump.cone_radius
    L = crystal.length
    gl2 = (gamma * L) ** 2
    coarse = _periodic_gauss_integral(d_kappa, tm.kappa_tilde, gl2, n_phi)
    fine = _periodic_gauss_integral(d_kappa, tm.kappa_tilde, gl2, 2 * n_phi)
    err = np.abs(fine - coarse)
    if radial_prefactor:
        inv_sigma = 2 * (gamma * L / (ind.n_o_signal * ind.k0)) ** 2
        k2 = np.sum(pts * pts, axis=1)
        pref = np.exp(-inv_sigma * (k2 - r2) ** 2)
    else:
        pref = 1.0
    shape = (grid.ny, grid.nx)
    diag = {
        "method": "analytic",
        "radial_prefactor": radial_prefactor,
        "error": (pref * err).reshape(shape),
        "converged": (err <= rel_tol * np.abs(fine)).reshape(shape),
        "coarse": (pref * coarse).reshape(shape),
        "n_phi": n_phi,
    }
    return SpectrumGrid(grid.kx_range, grid.ky_range, (pref * fine).reshape(shape), diag)


# ----------------------------------------------------------------------- CAS

def cas_numeric(grid: GridSpec, k_idler, crystal: CrystalConfig, pump: PumpBeam,
                pm: PhaseMatchSpec = PhaseMatchSpec("sinc")) -> SpectrumGrid:
    """Conditional angular spectrum ``|ψ̃(k⊥ˢ + k⊥ⁱ)|² env²(L Δk_z / 2)``.

    With the frequencies fixed at degeneracy the CAS is a pointwise product;
    no integral is left.  Signal vectors beyond the ordinary shell get zero.
    """
    ind = derived_indices(crystal, pump.wavelength)
    ki = np.asarray(k_idler, dtype=float)
    pts = grid.points()
    kp = pts + ki
    mod2 = pump_modulus(np.hypot(kp[..., 0], kp[..., 1]), pump) ** 2
    k0 = ind.k0
    ksig2 = ind.k_signal**2
    qs = ksig2 - np.sum(pts * pts, axis=-1)
    qi = ksig2 - float(ki @ ki)
    if qi <= 0:
        raise DomainError(f"idler vector {tuple(ki)} is evanescent")
    rad_p = 1.0 - ind.eta * np.sum(kp * kp, axis=-1) / (k0 * k0)
    ok = (qs > 0) & (rad_p > 0)
    a = ind.axis
    kz_p = -ind.beta * (a[0] * kp[..., 0] + a[1] * kp[..., 1]) + k0 * ind.n_eff * np.sqrt(np.where(ok, rad_p, 1.0))
    dk = kz_p - np.sqrt(np.where(ok, qs, 1.0)) - math.sqrt(qi)
    vals = np.where(ok, mod2 * pm_envelope(dk, crystal.length, pm) ** 2, 0.0)
    diag = {"method": "numeric", "envelope": pm.envelope, "idler": tuple(ki),
            "evanescent_cells": int(np.count_nonzero(~ok))}
    return SpectrumGrid(grid.kx_range, grid.ky_range, vals, diag)


@dataclass(frozen=True)
class CasClosedForm:
    """Parameters of the Gaussian-envelope CAS along one transverse direction.

    ``r_k_squared`` may be negative; ``r_k`` is its signed square root.
    """

    w_eff: float
    k0_perp: tuple
    r_k_squared: float
    direction: tuple

    @property
    def r_k(self) -> float:
        return math.copysign(math.sqrt(abs(self.r_k_squared)), self.r_k_squared)


def _cas_params(ki, direction, ind, pump, length, gamma):
    # vectorized over the leading axes of ``direction`` (unit 2-vectors)
    a = ind.axis[:2]
    w = pump.width
    kap = pump.cone_radius
    curv = 2.0 / (ind.n_o_signal * ind.k0)
    a_dot_dir = direction @ a
    w_eff2 = 1.0 / (w**-2 + (gamma * length * ind.beta * a_dot_dir) ** 2)
    ratio = w_eff2 / w**2
    g2 = gamma**2 * length**2 * w_eff2  # (γ L W_eff)²
    mis = ind.k0 * (ind.n_eff - ind.n_o_signal) - ind.beta * float(a @ ki)
    vec = curv * ki - ind.beta * a
    k0_perp = -ratio[..., None] * ki + (g2 * mis)[..., None] * vec
    ki2 = float(ki @ ki)
    lin = curv * ki2 - ind.beta * float(a @ ki)
    r2 = (ratio * kap**2 + ki2 * (ratio**2 - ratio) + 2 * g2 * mis * lin
          - lin**2 * g2 * (1 - g2 * float(vec @ vec)))
    return np.sqrt(w_eff2), k0_perp, r2


def cas_closed_form(k_idler, crystal: CrystalConfig, pump: PumpBeam, direction=None,
                    gamma: float = SINC_GAUSS_GAMMA) -> CasClosedForm:
    """Effective width, ring centre and squared ring radius of the CAS.

    ``direction`` is the transverse direction entering the walk-off term of
    ``W_eff``; by default the projection of the optical axis, where ``W_eff``
    is smallest.  Perpendicular to it ``W_eff = W``.
    """
    ind = derived_indices(crystal, pump.wavelength)
    ki = np.asarray(k_idler, dtype=float)
    if direction is None:
        a = ind.axis[:2]
        na = float(np.hypot(*a))
        direction = a / na if na > 0 else np.array([1.0, 0.0])
    u = np.asarray(direction, dtype=float)
    u = u / np.hypot(*u)
    w_eff, k0p, r2 = _cas_params(ki, u, ind, pump, crystal.length, gamma)
    return CasClosedForm(float(w_eff), tuple(float(v) for v in k0p), float(r2),
                         tuple(float(v) for v in u))


def cas_analytic(grid: GridSpec, k_idler, crystal: CrystalConfig, pump: PumpBeam,
                 gamma: float = SINC_GAUSS_GAMMA, form: str = "spot"):
    """Closed-form conditional angular spectrum.

    ``form="spot"`` evaluates ``exp(−(|k⊥ˢ − K⁰|² − ℛ²) / 2W_eff²)``, a
    Gaussian spot at ``K⁰`` (huge dynamic range, so the map is divided by its
    maximum; the log of that maximum is kept in the diagnostics).
    ``form="annulus"`` evaluates ``exp(−(|k⊥ˢ − K⁰| − ℛ)² / 2W_eff²)``, a
    ring of radius ℛ about ``K⁰`` that reduces to the pump annulus as L → 0.

    ``W_eff``, ``K⁰`` and ``ℛ`` are evaluated per node with the direction of
    ``k⊥ˢ + k⊥ⁱ``.  Returns the map and :func:`cas_closed_form` along the
    optical-axis projection.
    """
    if form not in ("spot", "annulus"):
        raise ValueError(f"unknown form {form!r}")
    ind = derived_indices(crystal, pump.wavelength)
    ki = np.asarray(k_idler, dtype=float)
    pts = grid.points()
    kp = pts + ki
    norm = np.hypot(kp[..., 0], kp[..., 1])
    u = np.where(norm[..., None] > 0, kp / np.where(norm > 0, norm, 1.0)[..., None], [1.0, 0.0])
    w_eff, k0p, r2 = _cas_params(ki, u, ind, pump, crystal.length, gamma)
    dist = np.hypot(pts[..., 0] - k0p[..., 0], pts[..., 1] - k0p[..., 1])
    if form == "spot":
        expo = -(dist**2 - r2) / (2 * w_eff**2)
    else:
        r = np.sign(r2) * np.sqrt(np.abs(r2))
        expo = -((dist - r) ** 2) / (2 * w_eff**2)
    peak = float(expo.max())
    vals = np.exp(expo - peak)
    diag = {"method": "analytic", "form": form, "log_peak": peak, "idler": tuple(ki)}
    return (SpectrumGrid(grid.kx_range, grid.ky_range, vals, diag),
            cas_closed_form(ki, crystal, pump, gamma=gamma))


def pi_residual(k_signal, k_idler, indices: DerivedIndices, kappa: float,
                freq_ratio: float = 1.0, relative: bool = False):
    """Signed residual of the propagation-invariance condition for the signal.

    ``|k⊥ˢ + k⊥ⁱ|² ρ² + kₛ²(1 − ρ²) − (kₛ²/k₀ⁱ²)[(k⊥ⁱ·k̂⊥ˢ)² + k⊥ⁱ² + k⊥ⁱ·k⊥ˢ] − κ²``
    with ``ρ = ωⁱ/ωˢ`` and ``k₀ⁱ = n_o ωⁱ/c``.  Zero puts the signal exactly
    on the tilted invariance cone.  With ``relative=True`` the residual is
    divided by ``(k⊥ˢ)²``, the scale of the leading terms it corrects.
    """
    ks = np.asarray(k_signal, dtype=float)
    ki = np.asarray(k_idler, dtype=float)
    ks2 = np.sum(ks * ks, axis=-1)
    ki2 = np.sum(ki * ki, axis=-1)
    kp = ks + ki
    dot = np.sum(ki * ks, axis=-1)
    k0i = indices.n_o_signal * indices.k0 / 2 * freq_ratio
    proj2 = np.where(ks2 > 0, dot**2 / np.where(ks2 > 0, ks2, 1.0), 0.0)
    rho2 = freq_ratio**2
    res = (np.sum(kp * kp, axis=-1) * rho2 + ks2 * (1 - rho2)
           - ks2 / k0i**2 * (proj2 + ki2 + dot) - kappa**2)
    if relative:
        res = res / ks2
    return res


# ------------------------------------------------------------------ maxima

@dataclass(frozen=True)
class Peak:
    kx: float
    ky: float
    value: float


def find_max(grid: SpectrumGrid, rtol: float = 1e-9) -> Peak:
    """Location of the largest node value.

    Nodes within ``rtol`` of the maximum count as tied; the tie goes to the
    smallest ``|k⊥|`` and then to the smallest azimuth in ``[0, 2π)``.
    """
    v = grid.values
    vmax = float(v.max())
    if vmax <= 0.0:
        raise ValueError("grid is identically zero; no maximum to report")
    iy, ix = np.nonzero(v >= vmax * (1 - rtol))
    kx, ky = grid.kx[ix], grid.ky[iy]
    kr = np.round(np.hypot(kx, ky), 12)
    az = np.round(np.mod(np.arctan2(ky, kx), 2 * np.pi), 12)
    best = np.lexsort((az, kr))[0]
    return Peak(float(kx[best]), float(ky[best]), float(v[iy[best], ix[best]]))
