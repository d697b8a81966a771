"""Independent reference computations used by the tests.

None of these share code with the package: they sum entries directly,
enumerate paths naively, or call scipy/numpy routines.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np
from scipy.optimize import brentq


def brute_force_2d(cols):
    """First violated condition of ``cols[i][j]`` (column i, row j from the bottom), or None.

    Every contiguous block is summed entry by entry.
    """
    m = len(cols)
    total = sum(sum(c) for c in cols)
    if total != 1:
        return "a"
    for i in range(m):
        if sum(cols[i]) <= 0:
            return "b"
    for j in range(m):
        if sum(cols[i][j] for i in range(m)) <= 0:
            return "b"
    for i1, i2, j1, j2 in itertools.product(range(m), repeat=4):
        if i1 > i2 or j1 > j2:
            continue
        if not (i1 == 0 or i2 == m - 1 or j1 == 0 or j2 == m - 1):
            continue
        if sum(cols[i][j] for i in range(i1, i2 + 1) for j in range(j1, j2 + 1)) < 0:
            return "c"
    return None


def brute_force_nd(E: np.ndarray):
    """First violated membership condition for a dense n-d Fraction array, or None."""
    shape = E.shape
    if sum(E.flat, Fraction(0)) != 1:
        return "a"
    for ax in range(E.ndim):
        for k in range(shape[ax]):
            if sum(x for idx, x in np.ndenumerate(E) if idx[ax] == k) <= 0:
                return "b"
    for ax in range(E.ndim):
        for r in np.ndindex(*shape):
            k = r[ax]
            slab = sum(x for idx, x in np.ndenumerate(E) if idx[ax] == k)
            part = sum(
                x for idx, x in np.ndenumerate(E)
                if idx[ax] == k and all(idx[h] <= r[h] for h in range(E.ndim))
            )
            if not 0 <= part <= slab:
                return "c"
    return None


def alpha_oracle(E: np.ndarray) -> Fraction:
    best = None
    for i in np.ndindex(*E.shape):
        hi = sum(abs(x) for r, x in np.ndenumerate(E) if all(r[h] <= i[h] for h in range(E.ndim)))
        lo = sum(abs(x) for r, x in np.ndenumerate(E) if all(r[h] <= i[h] - 1 for h in range(E.ndim)))
        d = hi - lo
        best = d if best is None or d > best else best
    return best


def moran_root(ratios, hi=10.0) -> float:
    c = np.asarray(ratios, dtype=float)
    return brentq(lambda s: float(np.sum(c**s)) - 1.0, 1e-9, hi, xtol=1e-15, rtol=1e-15)


def family_root(r: float, n: int = 2) -> float:
    return brentq(lambda s: (1 - r) ** s + 3**n * (r / 3) ** s - 1.0, 1.0, float(n), xtol=1e-15, rtol=1e-15)


def iterate_T(cols, base, levels: int):
    """``T^levels(base)`` built literally as nested closures over the raw entries."""
    m = len(cols)
    col = [sum(c) for c in cols]
    row = [sum(cols[i][j] for i in range(m)) for j in range(m)]
    p = [sum(col[:k]) for k in range(m + 1)]
    q = [sum(row[:k]) for k in range(m + 1)]

    def step(Q):
        def TQ(u, v):
            i = next(k for k in range(1, m + 1) if u < p[k] or k == m)
            j = next(k for k in range(1, m + 1) if v < q[k] or k == m)
            x = (u - p[i - 1]) / (p[i] - p[i - 1])
            y = (v - q[j - 1]) / (q[j] - q[j - 1])
            below = sum(cols[a][b] for a in range(i - 1) for b in range(j - 1))
            c = sum(cols[i - 1][b] for b in range(j - 1))
            r = sum(cols[a][j - 1] for a in range(i - 1))
            return below + x * c + y * r + cols[i - 1][j - 1] * Q(x, y)
        return TQ

    Q = base
    for _ in range(levels):
        Q = step(Q)
    return Q


def affine_fit(points, values):
    """Least-squares ``g1 + g2 u + g3 v``; returns coefficients and max residual."""
    pts = np.asarray(points, dtype=float)
    A = np.column_stack([np.ones(len(pts)), pts[:, 0], pts[:, 1]])
    y = np.asarray(values, dtype=float)
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    return coef, float(np.max(np.abs(A @ coef - y)))
