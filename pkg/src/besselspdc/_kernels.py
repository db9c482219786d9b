"""Compiled inner loops.  All kernels release the GIL and sum with Neumaier
compensation in a fixed order, so a cell value never depends on threading."""

import math

import numpy as np
from numba import njit

SINC = 0
GAUSSIAN = 1


@njit(cache=True, nogil=True)
def _env2(x, mode, gamma):
    if mode == SINC:
        if x == 0.0:
            return 1.0
        s = math.sin(x) / x
        return s * s
    return math.exp(-2.0 * gamma * gamma * x * x)


@njit(cache=True, nogil=True)
def as_cell(ksx, ksy, kz_s, r, rw, kz_r, cs, sn, tilt, ksig2, half_l, mode, gamma):
    """Inner angular-spectrum integral over the pump annulus for one signal vector.

    r, rw    radial nodes and weights (weights already include r·|ψ(r)|²)
    kz_r     k0·n_eff·sqrt(1 − η r²/k0²) at each radial node
    cs, sn   cos/sin of the equispaced azimuth nodes
    tilt     β·(a_x cos + a_y sin) at each azimuth node
    """
    total = 0.0
    comp = 0.0
    for j in range(r.shape[0]):
        rj = r[j]
        wj = rw[j]
        kzj = kz_r[j] - kz_s
        for m in range(cs.shape[0]):
            kix = rj * cs[m] - ksx
            kiy = rj * sn[m] - ksy
            q = ksig2 - kix * kix - kiy * kiy
            if q <= 0.0:
                continue  # idler would be evanescent
            dk = kzj - rj * tilt[m] - math.sqrt(q)
            v = wj * _env2(half_l * dk, mode, gamma)
            t = total + v
            if abs(total) >= abs(v):
                comp += (total - t) + v
            else:
                comp += (v - t) + total
            total = t
    return (total + comp) * (2.0 * math.pi / cs.shape[0])


@njit(cache=True, nogil=True)
def neumaier(values):
    total = 0.0
    comp = 0.0
    for v in values.ravel():
        t = total + v
        if abs(total) >= abs(v):
            comp += (total - t) + v
        else:
            comp += (v - t) + total
        total = t
    return total + comp


def as_tables(r, rw, n_phi, indices):
    """Per-level lookup tables for :func:`as_cell`."""
    k0 = indices.k0
    kz_r = k0 * indices.n_eff * np.sqrt(1.0 - indices.eta * r * r / (k0 * k0))
    phi = 2 * np.pi * np.arange(n_phi) / n_phi
    cs, sn = np.cos(phi), np.sin(phi)
    a = indices.axis
    tilt = indices.beta * (a[0] * cs + a[1] * sn)
    return (np.ascontiguousarray(r), np.ascontiguousarray(rw), kz_r, cs, sn, tilt)
