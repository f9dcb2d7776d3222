"""Pure-Python kernels; same signatures and results as the compiled ``_kernels``.

Unitaries about a fixed axis are carried in SU(2) form ``[[a, b], [-b*, a*]]``
so only the pair ``(a, b)`` is multiplied in the inner loops.
"""

from __future__ import annotations

import math

import numpy as np

_SQRT2 = math.sqrt(2.0)


def _su2(nx: float, ny: float, nz: float, angle: float) -> tuple[complex, complex]:
    c = math.cos(0.5 * angle)
    s = math.sin(0.5 * angle)
    return complex(c, -s * nz), complex(-s * ny, -s * nx)


def _su2_mul(a1: complex, b1: complex, a2: complex, b2: complex) -> tuple[complex, complex]:
    # (left) @ (right) for left=(a1,b1), right=(a2,b2)
    return (a1 * a2 - b1 * b2.conjugate(), a1 * b2 + b1 * a2.conjugate())


def eigh2(a: float, d: float, b: complex):
    """Eigenpairs of ``[[a, b], [b*, d]]``, eigenvalues ascending.

    Returns ``(l0, l1, u0, u1, w0, w1)``; ``(u0, u1)`` belongs to ``l0``.
    """
    half_sum = 0.5 * (a + d)
    half_diff = 0.5 * (a - d)
    babs = abs(b)
    r = math.hypot(half_diff, babs)
    l0 = half_sum - r
    l1 = half_sum + r
    if babs == 0.0:
        if a <= d:
            return a, d, 1.0 + 0j, 0j, 0j, 1.0 + 0j
        return d, a, 0j, 1.0 + 0j, 1.0 + 0j, 0j
    vecs = []
    for sign in (-1.0, 1.0):
        # null vectors of (m - lam); lam - a and lam - d are formed from the
        # half difference so nothing cancels, and the longer candidate is kept
        c1 = (b, complex(-half_diff + sign * r))
        c2 = (complex(half_diff + sign * r), b.conjugate())
        n1 = math.hypot(abs(c1[0]), abs(c1[1]))
        n2 = math.hypot(abs(c2[0]), abs(c2[1]))
        v, n = (c1, n1) if n1 >= n2 else (c2, n2)
        vecs.append((v[0] / n, v[1] / n))
    return l0, l1, vecs[0][0], vecs[0][1], vecs[1][0], vecs[1][1]


def compose_rotations(axes, angles) -> np.ndarray:
    """Cumulative products of axis-angle rotations.

    ``out[m] = R_m ... R_1`` with ``out[0]`` the identity; shape ``(n+1, 2, 2)``.
    """
    n = len(angles)
    out = np.empty((n + 1, 2, 2), dtype=complex)
    a, b = 1.0 + 0j, 0j
    out[0] = ((a, b), (-b.conjugate(), a.conjugate()))
    for m in range(n):
        nx, ny, nz = axes[m]
        ra, rb = _su2(float(nx), float(ny), float(nz), float(angles[m]))
        a, b = _su2_mul(ra, rb, a, b)
        out[m + 1] = ((a, b), (-b.conjugate(), a.conjugate()))
    return out


def gaussian_step_propagator(nx: float, ny: float, nz: float, angle: float,
                             sigma_fraction: float, truncation: float,
                             n_slices: int) -> np.ndarray:
    """Time-ordered propagator of an area-normalized truncated Gaussian pulse.

    The step is mapped to unit duration and cut into ``n_slices`` equal slices.
    Each slice contributes the exact rotation by its share of the envelope
    area (the axis is fixed, so the per-slice exponential is exact).
    """
    center = 0.5
    sigma = sigma_fraction
    lo = max(0.0, center - truncation * sigma)
    hi = min(1.0, center + truncation * sigma)
    scale = 1.0 / (sigma * _SQRT2)

    def cdf(t: float) -> float:
        t = min(max(t, lo), hi)
        return math.erf((t - center) * scale)

    total = cdf(hi) - cdf(lo)
    a, b = 1.0 + 0j, 0j
    prev = cdf(0.0)
    for k in range(n_slices):
        cur = cdf((k + 1) / n_slices)
        theta = angle * (cur - prev) / total
        prev = cur
        if theta == 0.0:
            continue
        ra, rb = _su2(nx, ny, nz, theta)
        a, b = _su2_mul(ra, rb, a, b)
    return np.array([[a, b], [-b.conjugate(), a.conjugate()]], dtype=complex)
