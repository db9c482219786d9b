"""Ridge extraction and circle fits on spectrum maps.

Maps are sampled along rays by bilinear interpolation, so ridge radii and
widths are resolved below the grid spacing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .spectra import SpectrumGrid


def bilinear(grid: SpectrumGrid, x, y):
    """Bilinear interpolation of the map; points outside the grid give 0."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    (x0, x1), (y0, y1) = grid.kx_range, grid.ky_range
    fx = (x - x0) / (x1 - x0) * (grid.nx - 1)
    fy = (y - y0) / (y1 - y0) * (grid.ny - 1)
    inside = (fx >= 0) & (fx <= grid.nx - 1) & (fy >= 0) & (fy <= grid.ny - 1)
    ix = np.clip(np.floor(fx).astype(int), 0, grid.nx - 2)
    iy = np.clip(np.floor(fy).astype(int), 0, grid.ny - 2)
    tx = np.clip(fx - ix, 0.0, 1.0)
    ty = np.clip(fy - iy, 0.0, 1.0)
    v = grid.values
    out = ((1 - tx) * (1 - ty) * v[iy, ix] + tx * (1 - ty) * v[iy, ix + 1]
           + (1 - tx) * ty * v[iy + 1, ix] + tx * ty * v[iy + 1, ix + 1])
    return np.where(inside, out, 0.0)


def kasa_circle(x, y, weights=None):
    """Algebraic (Kåsa) least-squares circle ``(cx, cy, R)``, optionally weighted."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    w = np.ones_like(x) if weights is None else np.sqrt(np.asarray(weights, float))
    if x.size < 3:
        raise ValueError("need at least three points for a circle fit")
    A = np.stack([2 * x, 2 * y, np.ones_like(x)], axis=1) * w[:, None]
    b = (x * x + y * y) * w
    (cx, cy, c), *_ = np.linalg.lstsq(A, b, rcond=None)
    return float(cx), float(cy), float(math.sqrt(c + cx * cx + cy * cy))


@dataclass(frozen=True)
class Ridge:
    """Ridge samples along rays from ``center``.

    ``radius`` and ``value`` are the peak position and height per ray,
    ``fwhm`` the full width at half maximum along the ray (NaN where the
    profile does not drop below half on both sides).
    """

    center: tuple
    angle: np.ndarray
    radius: np.ndarray
    value: np.ndarray
    fwhm: np.ndarray

    @property
    def points(self):
        cx, cy = self.center
        return cx + self.radius * np.cos(self.angle), cy + self.radius * np.sin(self.angle)

    def circle(self):
        """Intensity-weighted Kåsa fit through the ridge points."""
        ok = np.isfinite(self.radius) & (self.value > 0)
        x, y = self.points
        return kasa_circle(x[ok], y[ok], self.value[ok])

    def mean_radius(self):
        ok = np.isfinite(self.radius) & (self.value > 0)
        return float(np.average(self.radius[ok], weights=self.value[ok]))


def _half_crossing(r, prof, i, half, step):
    j = i
    while 0 <= j + step < len(prof) and prof[j + step] >= half:
        j += step
    k = j + step
    if not 0 <= k < len(prof):
        return math.nan
    # linear interpolation between j (above) and k (below)
    t = (prof[j] - half) / (prof[j] - prof[k])
    return r[j] + t * (r[k] - r[j])


def _refine(r, prof, i):
    if 0 < i < len(prof) - 1:
        a, b, c = prof[i - 1], prof[i], prof[i + 1]
        den = a - 2 * b + c
        if den < 0:
            off = 0.5 * (a - c) / den
            return r[i] + off * (r[1] - r[0]), b - 0.25 * (a - c) * off
    return r[i], prof[i]


def ray_profiles(grid, center, r_range, n_angles=360, n_radii=None):
    cx, cy = center
    if n_radii is None:
        h = min(grid.spec.spacing)
        n_radii = int(math.ceil((r_range[1] - r_range[0]) / (0.25 * h))) + 1
    ang = 2 * np.pi * np.arange(n_angles) / n_angles
    r = np.linspace(r_range[0], r_range[1], n_radii)
    x = cx + r[None, :] * np.cos(ang)[:, None]
    y = cy + r[None, :] * np.sin(ang)[:, None]
    return ang, r, bilinear(grid, x, y)


def ring_ridge(grid: SpectrumGrid, center=(0.0, 0.0), r_range=(0.0, 0.7),
               n_angles=360) -> Ridge:
    """Strongest ridge along each ray from ``center`` inside ``r_range``."""
    ang, r, prof = ray_profiles(grid, center, r_range, n_angles)
    rad = np.full(n_angles, np.nan)
    val = np.zeros(n_angles)
    fw = np.full(n_angles, np.nan)
    for a in range(n_angles):
        p = prof[a]
        i = int(np.argmax(p))
        if p[i] <= 0:
            continue
        rad[a], val[a] = _refine(r, p, i)
        lo = _half_crossing(r, p, i, 0.5 * p[i], -1)
        hi = _half_crossing(r, p, i, 0.5 * p[i], +1)
        fw[a] = hi - lo
    return Ridge(tuple(center), ang, rad, val, fw)


def _local_maxima(p, min_sep, floor):
    idx = [i for i in range(1, len(p) - 1) if p[i] >= p[i - 1] and p[i] > p[i + 1] and p[i] > floor]
    idx.sort(key=lambda i: -p[i])
    keep = []
    for i in idx:
        if all(abs(i - k) >= min_sep for k in keep):
            keep.append(i)
    return keep


@dataclass(frozen=True)
class TwoCones:
    outer: Ridge
    inner: Ridge
    outer_circle: tuple  # (cx, cy, R)
    inner_circle: tuple
    touch_point: tuple
    merged_fraction: float


def two_cone_fit(grid: SpectrumGrid, r_range=(0.2, 0.7), n_angles=360,
                 min_separation=None, rel_floor=0.05) -> TwoCones:
    """Split a double-cone AS into outer and inner ridges and fit a circle to each.

    Along every ray from the origin the two strongest local maxima (at least
    ``min_separation`` apart, default two grid cells) are assigned to the
    outer and inner cone by radius.  Rays with a single maximum are where
    the ridges merge; the touch point is the circular-mean direction of the
    merged rays (or, if none merge, the ray of smallest ridge separation),
    at the mean ridge radius there.
    """
    ang, r, prof = ray_profiles(grid, (0.0, 0.0), r_range, n_angles)
    h = min(grid.spec.spacing)
    dr = r[1] - r[0]
    if min_separation is None:
        min_separation = 2 * h
    sep = max(1, int(round(min_separation / dr)))
    floor = rel_floor * float(prof.max())
    out_r = np.full(n_angles, np.nan)
    out_v = np.zeros(n_angles)
    in_r = np.full(n_angles, np.nan)
    in_v = np.zeros(n_angles)
    single = np.zeros(n_angles, dtype=bool)
    for a in range(n_angles):
        p = prof[a]
        peaks = _local_maxima(p, sep, floor)[:2]
        if not peaks:
            continue
        fits = sorted((_refine(r, p, i) for i in peaks), key=lambda t: t[0])
        if len(fits) == 1:
            single[a] = True
            out_r[a], out_v[a] = fits[0]
            in_r[a], in_v[a] = fits[0]
        else:
            (in_r[a], in_v[a]), (out_r[a], out_v[a]) = fits
    nan = np.full(n_angles, np.nan)
    outer = Ridge((0.0, 0.0), ang, out_r, out_v, nan)
    inner = Ridge((0.0, 0.0), ang, in_r, in_v, nan)
    both = ~single & np.isfinite(out_r) & np.isfinite(in_r)
    oc = kasa_circle(*_xy(ang[both], out_r[both]), out_v[both])
    ic = kasa_circle(*_xy(ang[both], in_r[both]), in_v[both])
    if single.any():
        t = math.atan2(np.sin(ang[single]).sum(), np.cos(ang[single]).sum())
        rr = float(np.mean(out_r[single]))
    else:
        gap = np.where(both, out_r - in_r, np.inf)
        a = int(np.argmin(gap))
        t = float(ang[a])
        rr = 0.5 * float(out_r[a] + in_r[a])
    touch = (rr * math.cos(t), rr * math.sin(t))
    return TwoCones(outer, inner, oc, ic, touch, float(single.mean()))


def _xy(ang, rad):
    return rad * np.cos(ang), rad * np.sin(ang)
