"""OAM-resolved pair amplitudes for tilted Bessel-Gauss detection modes.

An emitted photon is projected on a Bessel-Gauss mode whose main axis ``p3``
is tilted by ``(θ̃, φ̃)`` from the crystal normal.  In the mode's own frame
the mode is a thin ring ``k̃⊥ ≈ κ`` on the ordinary shell carrying
``exp(iℓψ)``, ψ being the azimuth about ``p3``.  The production route
integrates in those coordinates; the lab-frame route (effective dispersion,
Jacobian and binomial angular factor) is kept as an independent check.

Amplitudes are reported up to a global constant, and the constant phases
``i^ℓ`` of the mode spectra are dropped; neither affects moduli or marginals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .optics import CrystalConfig, DerivedIndices, PumpBeam, derived_indices
from .phasematch import PhaseMatchSpec, pm_envelope, pump_spectrum
from .quad import QuadratureSpec
from .spectra import r_as_squared

_GH_NODES = 5


@dataclass(frozen=True)
class TiltedFrame:
    theta: float
    phi: float
    p1: np.ndarray = field(repr=False)
    p2: np.ndarray = field(repr=False)
    p3: np.ndarray = field(repr=False)

    @property
    def matrix(self) -> np.ndarray:
        """Rows p1, p2, p3: maps lab components to frame components."""
        return np.stack([self.p1, self.p2, self.p3])

    def to_frame(self, k):
        return np.asarray(k, float) @ self.matrix.T

    def to_lab(self, k_tilde):
        return np.asarray(k_tilde, float) @ self.matrix


def tilted_frame(theta: float, phi: float) -> TiltedFrame:
    """Orthonormal frame with ``p3 = (sinθ cosφ, sinθ sinφ, cosθ)``."""
    if not 0.0 <= theta < math.pi / 2:
        raise ValueError(f"tilt must lie in [0, π/2), got {theta}")
    ct, st, cp, sp = math.cos(theta), math.sin(theta), math.cos(phi), math.sin(phi)
    return TiltedFrame(
        theta, phi,
        p1=np.array([ct * cp, ct * sp, -st]),
        p2=np.array([-sp, cp, 0.0]),
        p3=np.array([st * cp, st * sp, ct]),
    )


@dataclass(frozen=True)
class TiltedBesselMode:
    frame: TiltedFrame
    kappa: float  # µm⁻¹
    ell: int
    width: float  # µm⁻¹
    wavelength: float  # nm
    branch: str = "ordinary"

    def __post_init__(self):
        if self.kappa < 0:
            raise ValueError("mode cone radius must be non-negative")
        if self.width <= 0:
            raise ValueError("mode width must be positive")
        if self.branch not in ("ordinary", "extraordinary"):
            raise ValueError(f"unknown branch {self.branch!r}")
        object.__setattr__(self, "ell", int(self.ell))


def angular_factor(ell: int, theta: float, phi_t: float, phi, kz, k_perp):
    """Binomial angular sum of a tilted Bessel spectrum.

    ``Σ_m C(|ℓ|, m) (cosθ cos(φ−φ̃) + i sgn(ℓ) sin(φ−φ̃))^m (−(k_z/k⊥) sinθ)^{|ℓ|−m}``.
    Times ``(k⊥/κ)^{|ℓ|}`` this is ``exp(iℓψ)`` on the mode ring.
    """
    n = abs(int(ell))
    phi = np.asarray(phi, dtype=float)
    if n == 0:
        return np.ones(np.broadcast(phi, kz, k_perp).shape, dtype=complex)
    sgn = 1.0 if ell > 0 else -1.0
    u = math.cos(theta) * np.cos(phi - phi_t) + 1j * sgn * np.sin(phi - phi_t)
    v = -np.asarray(kz, float) / np.asarray(k_perp, float) * math.sin(theta)
    total = np.zeros(np.broadcast(u, v).shape, dtype=complex)
    for m in range(n + 1):
        total = total + math.comb(n, m) * u**m * v ** (n - m)
    return total


@dataclass(frozen=True)
class TiltedDispersion:
    kz: np.ndarray
    k_perp: np.ndarray
    jac: np.ndarray
    in_domain: np.ndarray
    valid: np.ndarray  # in domain and a genuine (k⊥ ≥ 0) solution of the ring


def tilted_dispersion(kappa: float, k0: float, phi, theta: float, phi_t: float, n_o: float,
                      branch: str = "+", jacobian: str = "approximate") -> TiltedDispersion:
    """Lab-frame shell of a tilted ordinary Bessel mode at lab azimuth φ.

    ``k0`` is the mode's vacuum wave number, so the shell radius is
    ``K = n_o k0``.  Returns ``K_z`` on the requested branch (``+`` or ``−``
    root), ``K⊥ = sqrt(K² − K_z²)`` and the Jacobian.  ``jacobian="approximate"``
    gives ``|k⊥ − k_z cos(φ̃−φ) sinθ| / κ``; ``"exact"`` is the determinant
    of (k⊥, k_z) → (k̃⊥, k̃_z), ``|k⊥ cosθ − k_z cos(φ̃−φ) sinθ| / κ``, which
    is what makes the ring measure integrate to 2π.

    ``in_domain`` is false where the inner radicand is negative; values are
    zeroed there.  ``valid`` additionally requires the root to be a real
    point of the ring, i.e. the signed transverse magnitude
    ``(sqrt(K²−κ²) − K_z cosθ) / (sinθ cos(φ−φ̃))`` to be non-negative;
    in-domain roots that fail this belong to the mirror window at φ̃ + π.
    """
    if branch not in ("+", "-"):
        raise ValueError(f"branch must be '+' or '-', got {branch!r}")
    if jacobian not in ("approximate", "exact"):
        raise ValueError(f"unknown jacobian {jacobian!r}")
    big_k = n_o * k0
    if not big_k > kappa:
        raise ValueError("mode cone radius must be below the shell radius")
    phi = np.asarray(phi, dtype=float)
    ct, st = math.cos(theta), math.sin(theta)
    t = st / ct
    c = np.cos(phi_t - phi)
    s = np.sin(phi_t - phi)
    rad = kappa**2 / ct**2 - big_k**2 * t * t * s * s
    in_dom = rad >= 0
    q = math.sqrt(big_k**2 - kappa**2)
    sign = 1.0 if branch == "+" else -1.0
    root = sign * abs(t) * np.abs(c) * np.sqrt(np.where(in_dom, rad, 0.0))
    den = 1 + t * t * c * c
    kz = (q / ct + root) / den
    # K² − K_z² = κ² + (q − K_z)(q + K_z), with q − K_z free of cancellation
    # (1 − 1/cosθ = −2 sin²(θ/2) / cosθ), so K⊥ stays accurate for κ ≪ K
    q_minus = (q * t * t * c * c - 2 * q * math.sin(theta / 2) ** 2 / ct - root) / den
    kp = np.sqrt(np.maximum(kappa**2 + q_minus * (q + kz), 0.0))
    kp_term = kp * (ct if jacobian == "exact" else 1.0)
    jac = np.abs(kp_term - kz * c * st) / kappa if kappa > 0 else np.full(kz.shape, np.inf)
    if st == 0.0:
        valid = in_dom & np.isclose(kp, kappa, rtol=1e-12, atol=0.0)
    else:
        # (q − K_z cosθ) / (sinθ c) with the cancellation and the 1/c removed;
        # at c = 0 the two roots coincide and only the "+" one is kept
        sc = np.where(c >= 0, 1.0, -1.0)
        signed = (q * t * c / ct - sign * math.copysign(1.0, t) * sc
                  * np.sqrt(np.where(in_dom, rad, 0.0))) / den
        valid = in_dom & (signed >= -1e-9 * max(kappa, 1e-300))
    zero = ~in_dom
    return TiltedDispersion(np.where(zero, 0.0, kz), np.where(zero, 0.0, kp),
                            np.where(zero, 0.0, jac), in_dom, valid)


# ------------------------------------------------------------ radial smear

def radial_smear(kappa: float, width: float, nodes: int = _GH_NODES):
    """Nodes and weights replacing the ring delta by the Bessel-Gauss annulus.

    The weight is ``k̃ G_W(k̃ − κ) / κ`` with G_W a unit-area Gaussian; for
    κ → 0 the ``1/κ`` is dropped.  Gauss-Hermite nodes are used when they
    all fall at positive radius, otherwise a Gauss-Legendre rule on
    ``[0, κ + 6W]``.
    """
    x, w = np.polynomial.hermite.hermgauss(nodes)
    k = kappa + math.sqrt(2.0) * width * x
    norm = kappa if kappa > 0 else 1.0
    if np.all(k > 0):
        return k, w / math.sqrt(math.pi) * k / norm
    n = 4 * nodes
    xg, wg = np.polynomial.legendre.leggauss(n)
    hi = kappa + 6 * width
    k = 0.5 * hi * (xg + 1)
    g = np.exp(-((k - kappa) ** 2) / (2 * width**2)) / (width * math.sqrt(2 * math.pi))
    return k, 0.5 * hi * wg * k * g / norm


def _mode_vectors(mode: TiltedBesselMode, k_shell: float, kt, psi):
    """Lab wave vectors on the ring of radius kt (array) at azimuths psi."""
    kz_t = np.sqrt(k_shell**2 - kt**2)
    f = mode.frame
    c, s = np.cos(psi), np.sin(psi)
    return (kt[:, None, None] * (c[None, :, None] * f.p1 + s[None, :, None] * f.p2)
            + kz_t[:, None, None] * f.p3)


# ------------------------------------------------------------- amplitudes

@dataclass(frozen=True)
class OamGeometry:
    theta_s: float
    phi_s: float
    theta_i: float
    phi_i: float
    kappa_s: float
    kappa_i: float
    width: float


def emission_cone_tilt(indices: DerivedIndices) -> float:
    """Polar tilt of the emission cone, ``arcsin(r_AS / (n_o k0 / 2))``."""
    return math.asin(math.sqrt(r_as_squared(indices)) / indices.k_signal)


def standard_geometry(crystal: CrystalConfig, pump: PumpBeam, kappa_s: float, kappa_i: float,
                      width: float, orientation: str = "vertical") -> OamGeometry:
    """Signal/idler frames on the emission cone, opposite in azimuth.

    ``vertical``: φ̃ₛ = −π/2, φ̃ᵢ = π/2 (the plane containing the axis
    projection).  ``horizontal``: φ̃ₛ = 0, φ̃ᵢ = π.
    """
    th = emission_cone_tilt(derived_indices(crystal, pump.wavelength))
    phis = {"vertical": (-math.pi / 2, math.pi / 2), "horizontal": (0.0, math.pi),
            "vertical-flipped": (math.pi / 2, -math.pi / 2)}
    if orientation not in phis:
        raise ValueError(f"unknown orientation {orientation!r}")
    ps, pi_ = phis[orientation]
    return OamGeometry(th, ps, th, pi_, kappa_s, kappa_i, width)


def _modes(geom: OamGeometry, pump: PumpBeam, ell_s=0, ell_i=0):
    lam = 2 * pump.wavelength
    s = TiltedBesselMode(tilted_frame(geom.theta_s, geom.phi_s), geom.kappa_s, ell_s, geom.width, lam)
    i = TiltedBesselMode(tilted_frame(geom.theta_i, geom.phi_i), geom.kappa_i, ell_i, geom.width, lam)
    return s, i


def _pair_kernel(ks, ws, ki, wi, pump, ind, length, pm):
    """Σ over radial node pairs of w_s w_i ψ_p env e^{iΔk L/2}.

    ks: (ns, n_s_az, 3) signal vectors, ki: (ni, n_i_az, 3).  Returns an
    (n_s_az, n_i_az) complex array.
    """
    a = ind.axis
    k0 = ind.k0
    out = np.zeros((ks.shape[1], ki.shape[1]), dtype=complex)
    for js in range(ks.shape[0]):
        s = ks[js]
        for ji in range(ki.shape[0]):
            i = ki[ji]
            kpx = s[:, None, 0] + i[None, :, 0]
            kpy = s[:, None, 1] + i[None, :, 1]
            kz_p = (-ind.beta * (a[0] * kpx + a[1] * kpy)
                    + k0 * ind.n_eff * np.sqrt(1.0 - ind.eta * (kpx * kpx + kpy * kpy) / (k0 * k0)))
            dk = kz_p - s[:, None, 2] - i[None, :, 2]
            amp = pump_spectrum(np.stack([kpx, kpy], axis=-1), pump)
            amp = amp * pm_envelope(dk, length, pm) * np.exp(0.5j * dk * length)
            out += (ws[js] * wi[ji]) * amp
    return out


def _mode_route_kernel(sig, idl, pump, crystal, ind, n, pm, nodes):
    psi = 2 * np.pi * np.arange(n) / n
    kshell = ind.k_signal
    kts, wts = radial_smear(sig.kappa, sig.width, nodes)
    kti, wti = radial_smear(idl.kappa, idl.width, nodes)
    ks = _mode_vectors(sig, kshell, kts, psi)
    ki = _mode_vectors(idl, kshell, kti, psi)
    return _pair_kernel(ks, wts, ki, wti, pump, ind, crystal.length, pm)


def _matrix_from_kernel(g, ell_s, ell_i):
    # F(ℓs, ℓi) = (2π/n)² Σ_ab G_ab e^{iℓs ψa} e^{iℓi ψb} = (2π)² ifft2(G)[ℓs, ℓi]
    n = g.shape[0]
    if max(np.abs(ell_s).max(), np.abs(ell_i).max()) >= n // 2:
        raise ValueError("ℓ range too large for the azimuthal resolution")
    spec = np.fft.ifft2(g) * (2 * np.pi) ** 2
    return spec[np.ix_(np.mod(ell_s, n), np.mod(ell_i, n))]


@dataclass
class OamAmplitudeMatrix:
    """Complex amplitudes ``F[ℓs − ℓs_min, ℓi − ℓi_min]`` with their geometry."""

    ell_s: np.ndarray
    ell_i: np.ndarray
    amplitudes: np.ndarray
    geometry: OamGeometry | None = None
    ell_p: int = 0
    kappa_p: float = float("nan")
    diagnostics: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        self.ell_s = np.asarray(self.ell_s, dtype=int)
        self.ell_i = np.asarray(self.ell_i, dtype=int)
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (self.ell_s.size, self.ell_i.size):
            raise ValueError("amplitude matrix does not match the ℓ ranges")
        if not np.all(np.isfinite(self.amplitudes)):
            raise ValueError("amplitude matrix has non-finite entries")

    @property
    def modulus(self):
        return np.abs(self.amplitudes)

    def normalized(self):
        m = self.modulus.max()
        return self.modulus / m if m > 0 else self.modulus

    def at(self, ell_s: int, ell_i: int) -> complex:
        return complex(self.amplitudes[int(ell_s - self.ell_s[0]), int(ell_i - self.ell_i[0])])

    def argmax(self) -> tuple[int, int]:
        m = self.modulus
        a, b = np.unravel_index(int(np.argmax(m)), m.shape)
        return int(self.ell_s[a]), int(self.ell_i[b])


def _ell_range(r):
    lo, hi = r
    if hi < lo:
        raise ValueError(f"empty ℓ range {r}")
    return np.arange(lo, hi + 1)


def amplitude_matrix(pump: PumpBeam, geometry: OamGeometry, ell_s_range=(-15, 15),
                     ell_i_range=(-15, 15), crystal: CrystalConfig = CrystalConfig(),
                     quad: QuadratureSpec = QuadratureSpec(),
                     pm: PhaseMatchSpec = PhaseMatchSpec("sinc"),
                     radial_nodes: int = _GH_NODES, route: str = "mode",
                     branches: str = "both") -> OamAmplitudeMatrix:
    """Transition amplitudes over a rectangle of (ℓs, ℓi).

    On the default ``mode`` route the ℓ-independent pair kernel on the
    (ψs, ψi) grid is built once per quadrature level and every cell is its
    two-dimensional Fourier coefficient.  ``route="lab"`` integrates over lab
    azimuths instead and can be restricted to one root of the effective
    dispersion relation with ``branches="+"`` or ``"-"`` (each covers only
    part of the ring; for diagnostics).  The azimuthal grid is doubled until
    all cells change by less than ``quad.rel_tol`` relative to the largest
    one, or ``quad.max_doublings`` is exhausted.
    """
    ls, li = _ell_range(ell_s_range), _ell_range(ell_i_range)
    ind = derived_indices(crystal, pump.wavelength)
    sig, idl = _modes(geometry, pump)
    n = quad.azimuthal_points
    prev = None
    conv = False
    for j in range(quad.max_doublings + 1):
        if route == "mode":
            g = _mode_route_kernel(sig, idl, pump, crystal, ind, n << j, pm, radial_nodes)
            cur = _matrix_from_kernel(g, ls, li)
        elif route == "lab":
            cur, _ = _lab_matrix(pump, sig, idl, crystal, ind, n << j, pm, branches,
                                 radial_nodes, ls, li)
        else:
            raise ValueError(f"unknown route {route!r}")
        if prev is not None:
            err = np.abs(cur - prev)
            scale = np.abs(cur).max()
            if np.all(err <= max(quad.rel_tol * scale, quad.abs_tol)):
                conv = True
                break
        prev = cur
    rel_change = np.abs(np.abs(cur) - np.abs(prev)) / np.maximum(np.abs(cur), 1e-300)
    diag = {"error": err, "converged": conv, "azimuthal_points": n << j, "route": route,
            "branches": branches if route == "lab" else "both",
            "relative_modulus_change": rel_change, "coarse": prev}
    return OamAmplitudeMatrix(ls, li, cur, geometry, pump.oam, pump.cone_radius, diag)


@dataclass(frozen=True)
class AmplitudeResult:
    value: complex
    error: float
    converged: bool
    diagnostics: dict = field(default_factory=dict, compare=False)


def transition_amplitude(pump: PumpBeam, signal: TiltedBesselMode, idler: TiltedBesselMode,
                         crystal: CrystalConfig = CrystalConfig(),
                         quad: QuadratureSpec = QuadratureSpec(),
                         pm: PhaseMatchSpec = PhaseMatchSpec("sinc"),
                         route: str = "mode", branches: str = "both",
                         radial_nodes: int = _GH_NODES) -> AmplitudeResult:
    """Pair amplitude ``F(ℓp, κp; ℓs, κs; ℓi, κi)`` for one mode triple.

    ``route="mode"`` integrates each emitted photon over its own ring
    coordinates (k̃⊥, ψ) with weight ``e^{iℓψ}``.  ``route="lab"`` uses the
    lab-frame azimuth φ with the effective dispersion relation, the exact
    Jacobian and the binomial angular factor, summing the branches named by
    ``branches`` (``"both"``, ``"+"`` or ``"-"``); it needs the signal and
    idler to be tilted.  The two routes agree when both branches are used.
    """
    ind = derived_indices(crystal, pump.wavelength)
    if signal.wavelength != idler.wavelength or abs(signal.wavelength - 2 * pump.wavelength) > 1e-9:
        raise ValueError("only degenerate signal and idler at twice the pump wavelength are supported")
    n = quad.azimuthal_points
    vals = []
    info = {}
    for j in range(quad.max_doublings + 1):
        if route == "mode":
            g = _mode_route_kernel(signal, idler, pump, crystal, ind, n << j, pm, radial_nodes)
            v = complex(_matrix_from_kernel(g, np.array([signal.ell]), np.array([idler.ell]))[0, 0])
        elif route == "lab":
            v, info = _lab_route(pump, signal, idler, crystal, ind, n << j, pm, branches, radial_nodes)
        else:
            raise ValueError(f"unknown route {route!r}")
        vals.append(v)
        if j and abs(vals[-1] - vals[-2]) <= max(quad.rel_tol * abs(vals[-1]), quad.abs_tol):
            break
    err = abs(vals[-1] - vals[-2])
    conv = err <= max(quad.rel_tol * abs(vals[-1]), quad.abs_tol)
    return AmplitudeResult(vals[-1], err, conv, dict(info, levels=len(vals)))


def _lab_samples(mode: TiltedBesselMode, ind, n_t, branches, radial_nodes):
    """Lab-frame quadrature of a tilted mode ring, one block per radial node.

    Each block is ``(vectors, weights, kt)``: lab wave vectors on the valid
    roots of the effective dispersion relation, weights
    ``w_radial · dφ · K⊥ / (k̃ Jac)`` and the ring radius k̃ of the block.
    Near the edges of the azimuth window the roots merge and the Jacobian
    vanishes; ``φ = φ̃ + arcsin(s_max sin t)`` removes that singularity.
    """
    th, pt = mode.frame.theta, mode.frame.phi
    if th == 0.0:
        raise ValueError("the lab route needs a tilted mode frame")
    n_o, k0 = ind.n_o_signal, ind.k0 / 2
    big_k = n_o * k0
    brs = ("+", "-") if branches == "both" else (branches,)
    x, w = np.polynomial.legendre.leggauss(n_t)
    t = 0.5 * math.pi * x
    wt = 0.5 * math.pi * w
    blocks = []
    kts, wts = radial_smear(mode.kappa, mode.width, radial_nodes)
    for kt, wk in zip(kts, wts):
        smax = kt / (big_k * math.sin(th))
        if smax < 1:
            u = smax * np.sin(t)
            dphi = smax * np.cos(t) / np.sqrt(1 - u * u)
            phis = [(pt + np.arcsin(u), wt * dphi), (pt + math.pi + np.arcsin(u), wt * dphi)]
        else:
            m = 2 * n_t
            phis = [(2 * np.pi * np.arange(m) / m, np.full(m, 2 * np.pi / m))]
        vecs, weights = [], []
        for phi, dw in phis:
            for br in brs:
                td = tilted_dispersion(kt, k0, phi, th, pt, n_o, br, jacobian="exact")
                ok = td.valid & (td.jac > 0)
                kp, kz, ph = td.k_perp[ok], td.kz[ok], phi[ok]
                vecs.append(np.stack([kp * np.cos(ph), kp * np.sin(ph), kz], axis=-1))
                weights.append(wk * dw[ok] * kp / (kt * td.jac[ok]))
        v = np.concatenate(vecs)
        if len(v):
            blocks.append((v, np.concatenate(weights), kt))
    return blocks


def _lab_phase(mode: TiltedBesselMode, vecs, kt, ells, form="binomial"):
    """``exp(iℓψ)`` on lab samples, shape (len(ells), n).

    ``binomial`` evaluates the angular factor times ``(k⊥/k̃)^{|ℓ|}``; the
    binomial terms cancel down to ``(k̃/k⊥)^{|ℓ|}``, so this form is only
    usable for small ``|ℓ|`` when the ring is far from the z axis.
    ``frame`` takes ψ from the frame components directly.
    """
    if form == "frame":
        kf = mode.frame.to_frame(vecs)
        psi = np.arctan2(kf[:, 1], kf[:, 0])
        return np.exp(1j * np.outer(ells, psi))
    kp = np.hypot(vecs[:, 0], vecs[:, 1])
    ph = np.arctan2(vecs[:, 1], vecs[:, 0])
    th, pt = mode.frame.theta, mode.frame.phi
    return np.array([angular_factor(l, th, pt, ph, vecs[:, 2], kp) * (kp / kt) ** abs(l)
                     for l in ells])


def _lab_matrix(pump, sig, idl, crystal, ind, n_t, pm, branches, radial_nodes, ls, li,
                form="frame"):
    sb = _lab_samples(sig, ind, n_t, branches, radial_nodes)
    ib = _lab_samples(idl, ind, n_t, branches, radial_nodes)
    out = np.zeros((len(ls), len(li)), dtype=complex)
    if not sb or not ib:
        return out, {"empty_domain": True}
    for vs, ws, kts in sb:
        es = _lab_phase(sig, vs, kts, ls, form) * ws
        for vi, wi, kti in ib:
            ei = _lab_phase(idl, vi, kti, li, form) * wi
            g = _pair_kernel(vs[None], np.ones(1), vi[None], np.ones(1), pump, ind,
                             crystal.length, pm)
            out += es @ g @ ei.T
    return out, {"empty_domain": False}


def _lab_route(pump, sig, idl, crystal, ind, n, pm, branches, radial_nodes):
    f, info = _lab_matrix(pump, sig, idl, crystal, ind, n, pm, branches, radial_nodes,
                          np.array([sig.ell]), np.array([idl.ell]), form="binomial")
    return complex(f[0, 0]), info


def marginals(matrix: OamAmplitudeMatrix) -> tuple[np.ndarray, np.ndarray]:
    """Signal and idler OAM marginals ``Σ|F|²``, each normalized to unit sum."""
    p = matrix.modulus**2
    total = p.sum()
    if not total > 0:
        raise ValueError("amplitude matrix is identically zero; marginals undefined")
    ms = p.sum(axis=1)
    mi = p.sum(axis=0)
    return ms / ms.sum(), mi / mi.sum()


def parity_window(marginal, rel_floor: float = 1e-4) -> int:
    """Length of the longest run of consecutive ℓ with alternating successive differences.

    Only entries above ``rel_floor`` times the maximum take part, so
    round-off wiggles in the far tails do not count.
    """
    m = np.asarray(marginal, float)
    keep = m > rel_floor * m.max()
    d = np.diff(m)
    best = run = 0
    for k in range(len(d) - 1):
        alt = keep[k] and keep[k + 1] and keep[k + 2] and d[k] * d[k + 1] < 0
        run = run + 1 if alt else 0
        best = max(best, run)
    # a run of r alternating difference pairs spans r + 2 values of ℓ
    return best + 2 if best else 0
