"""Zernike moment machinery shared by the per-object path and slab kernels.

Moments come from a Cartesian expansion: every conj(V_nm) with n <= 9 is a
complex polynomial in the unit-disk coordinates (u, v), so A_nm reduces to
a fixed linear combination of weighted geometric moments
M_pq = sum(u^p * v^q * I). The coefficient table is precomputed once.

Disk mapping per object: center at the binary centroid, disk radius
R = maxdist + 1 where maxdist is the largest centroid-to-pixel distance,
so every mask pixel lands strictly inside the unit disk. Magnitudes are
normalized by total in-mask intensity; phases of m = 0 terms are 0 by
convention. A moment whose magnitude falls below 1e-3 of the (0,0)
moment's exact value 1/(pi R^2) reports phase 0: the argument of a
vanishing moment is pure summation noise, and any two correct evaluation
orders disagree wildly there.
"""

from __future__ import annotations

from math import comb, factorial, pi

import numpy as np

from ..manifest import ZERNIKE_DEGREE, ZERNIKE_INDICES

MOMENT_ORDER = ZERNIKE_DEGREE + 1  # powers 0..9
# Phase floor relative to the (0,0) magnitude (which is exactly
# 1/(pi R^2) under this normalization).
PHASE_REL_FLOOR = 1e-3
# A moment whose imaginary part is this far below its magnitude is real:
# its phase pins to 0 or pi instead of dithering across the atan2 branch
# cut at +-pi (symmetric objects produce exactly real moments).
REAL_AXIS_FLOOR = 1e-6


def radial_coefficients(n: int, m: int) -> list[tuple[int, float]]:
    """[(rho power, coefficient)] of the radial polynomial R_nm."""
    out = []
    for s in range((n - m) // 2 + 1):
        coeff = (
            (-1) ** s
            * factorial(n - s)
            / (factorial(s) * factorial((n + m) // 2 - s) * factorial((n - m) // 2 - s))
        )
        out.append((n - 2 * s, float(coeff)))
    return out


def _cartesian_table() -> np.ndarray:
    """C[k, p, q] with conj(V_nm) = sum_pq C[k,p,q] u^p v^q."""
    table = np.zeros((len(ZERNIKE_INDICES), MOMENT_ORDER, MOMENT_ORDER), dtype=np.complex128)
    for k, (n, m) in enumerate(ZERNIKE_INDICES):
        for power, coeff in radial_coefficients(n, m):
            t = (power - m) // 2  # rho^power = (u^2+v^2)^t * rho^m
            for a in range(t + 1):
                for b in range(m + 1):
                    c = coeff * comb(t, a) * comb(m, b) * (-1j) ** b
                    p = 2 * a + (m - b)
                    q = 2 * (t - a) + b
                    table[k, p, q] += c
    return table


CARTESIAN_TABLE = _cartesian_table()
_N_PLUS_1 = np.array([n + 1 for n, _ in ZERNIKE_INDICES], dtype=np.float64)
_M_ORDER = np.array([m for _, m in ZERNIKE_INDICES], dtype=np.int64)


def scaled_moment_stack(weighted: np.ndarray, cx: np.ndarray, cy: np.ndarray,
                        radius: np.ndarray) -> np.ndarray:
    """M[d, p, q] = sum_pixels u^p v^q * w for a (D, H, W) weight stack.

    u = (col - cx) / radius per object; v likewise over rows. Slots with
    radius 0 produce zeros (callers blank those objects anyway).
    """
    d, h, w = weighted.shape
    safe_r = np.where(radius > 0, radius, 1.0)
    u = (np.arange(w, dtype=np.float64)[None, :] - cx[:, None]) / safe_r[:, None]
    v = (np.arange(h, dtype=np.float64)[None, :] - cy[:, None]) / safe_r[:, None]
    u_pow = np.ones((d, MOMENT_ORDER, w))
    v_pow = np.ones((d, MOMENT_ORDER, h))
    for p in range(1, MOMENT_ORDER):
        u_pow[:, p] = u_pow[:, p - 1] * u
        v_pow[:, p] = v_pow[:, p - 1] * v
    # T[d, q, j] = sum_i v^q_i * w_ij ; M[d, p, q] = sum_j u^p_j * T[d, q, j]
    t = np.matmul(v_pow, weighted)
    return np.matmul(t, np.transpose(u_pow, (0, 2, 1))).transpose(0, 2, 1)


def zernike_from_moments(moments: np.ndarray, radius: np.ndarray,
                         total: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(magnitudes, phases), each (D, 30), from scaled moment stacks."""
    coeffs = CARTESIAN_TABLE.reshape(len(ZERNIKE_INDICES), -1)
    a = moments.reshape(moments.shape[0], -1).astype(np.complex128) @ coeffs.T
    safe_r = np.where(radius > 0, radius, 1.0)
    a *= (_N_PLUS_1[None, :] / pi) / (safe_r**2)[:, None]
    live = ((radius > 0) & (total > 0)).astype(np.float64)
    safe_total = np.where(total > 0, total, 1.0)
    mags = np.abs(a) / safe_total[:, None] * live[:, None]
    phases = np.angle(a)
    realish = np.abs(a.imag) <= REAL_AXIS_FLOOR * np.abs(a)
    phases = np.where(realish, np.where(a.real >= 0, 0.0, np.pi), phases)
    phases[:, _M_ORDER == 0] = 0.0
    phase_floor = PHASE_REL_FLOOR / (np.pi * safe_r**2)
    phases[mags < phase_floor[:, None]] = 0.0
    return mags, phases
