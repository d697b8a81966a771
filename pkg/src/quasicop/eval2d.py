"""Evaluation of bivariate quasi-copulas generated by quasi-transformation matrices.

Every function here accepts either floats or :class:`~fractions.Fraction`
coordinates.  With Fractions (and an exact base function) the arithmetic is
exact; in particular the fixed point is returned exactly at corners of the
depth-l cells, where the recursion reaches the boundary of the unit square.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .qt_matrix import PartitionPair, QtMatrix2, partitions, to_fraction

Number = float | Fraction
Evaluable = Callable[[Number, Number], Number]


class OutOfDomain(ValueError):
    pass


class PathMassNonzero(ValueError):
    pass


class Estimate(NamedTuple):
    value: Number
    error_bound: float


# -- base quasi-copulas ------------------------------------------------------

def product(u, v):
    """Independence copula."""
    return u * v


def upper(u, v):
    """Frechet upper bound M."""
    return min(u, v)


def lower(u, v):
    """Frechet lower bound W."""
    return max(u + v - 1, 0 * u)


BASES: dict[str, Evaluable] = {"Pi": product, "M": upper, "W": lower}


def _check_unit(*xs) -> None:
    for x in xs:
        if not 0 <= x <= 1 or x != x:
            raise OutOfDomain(f"coordinate {x!r} outside [0, 1]")


def _exact(*xs) -> bool:
    return all(isinstance(x, (Fraction, int)) and not isinstance(x, bool) for x in xs)


def locate_cell(P: PartitionPair, u, v) -> tuple[int, int]:
    """One-based cell ``(i, j)`` with ``p[i-1] <= u < p[i]``; ``u = 1`` maps to ``m``."""
    _check_unit(u, v)
    return _locate(P.p, u), _locate(P.q, v)


def _locate(points: Sequence, x) -> int:
    m = len(points) - 1
    lo, hi = 1, m
    # smallest i with x < points[i], capped at m
    while lo < hi:
        mid = (lo + hi) // 2
        if x < points[mid]:
            hi = mid
        else:
            lo = mid + 1
    return lo


class _Tables:
    """Per-matrix lookup tables in one number type (Fraction or float)."""

    def __init__(self, M: QtMatrix2, exact: bool):
        conv = (lambda x: x) if exact else float
        m = M.order
        P = partitions(M)
        S = M.prefix
        self.m = m
        self.p = [conv(x) for x in P.p]
        self.q = [conv(x) for x in P.q]
        self.pf = P.p
        self.qf = P.q
        self.w = [conv(P.p[i + 1] - P.p[i]) for i in range(m)]
        self.h = [conv(P.q[j + 1] - P.q[j]) for j in range(m)]
        # below[i][j]: mass strictly below-left of cell (i, j); col[i][j]: column i
        # below row j; row[i][j]: row j left of column i (all zero-based)
        self.below = [[conv(S[i, j]) for j in range(m)] for i in range(m)]
        self.col = [[conv(S[i + 1, j] - S[i, j]) for j in range(m)] for i in range(m)]
        self.row = [[conv(S[i, j + 1] - S[i, j]) for j in range(m)] for i in range(m)]
        self.t = [[conv(M.entries[i, j]) for j in range(m)] for i in range(m)]


@lru_cache(maxsize=64)
def _tables(M: QtMatrix2, exact: bool) -> _Tables:
    return _Tables(M, exact)


def _step(tb: _Tables, u, v):
    """Locate the cell of (u, v); return the affine part, the entry and the rescaled point."""
    i = _locate(tb.p, u) - 1
    j = _locate(tb.q, v) - 1
    x = (u - tb.p[i]) / tb.w[i]
    y = (v - tb.q[j]) / tb.h[j]
    affine = tb.below[i][j] + x * tb.col[i][j] + y * tb.row[i][j]
    return affine, tb.t[i][j], x, y


def apply_T(M: QtMatrix2, Q: Evaluable, u, v):
    """One application of the T-transformation to ``Q`` at ``(u, v)``."""
    _check_unit(u, v)
    exact = _exact(u, v)
    if exact:
        u, v = Fraction(u), Fraction(v)
    affine, t, x, y = _step(_tables(M, exact), u, v)
    if t == 0:
        return affine
    return affine + t * Q(x, y)


def _boundary_value(u, v):
    """Exact value forced by the boundary conditions, or None inside the square."""
    if u == 0 or v == 0:
        return 0 * u
    if u == 1:
        return v
    if v == 1:
        return u
    return None


@dataclass(frozen=True)
class FixedPointEvaluator:
    """Evaluates the unique fixed point of ``T`` by single-branch recursive descent.

    Each step of the recursion only follows the cell containing the point, and
    scales the remaining unknown term by that cell's entry.  Descent stops when
    the point reaches the boundary of the square (exact), the entry is zero
    (exact), or the accumulated product of entries drops to ``tolerance`` in
    absolute value; the unknown is then replaced by the product copula and the
    accumulated product is reported as the error bound.
    """

    matrix: QtMatrix2
    tolerance: float = 1e-12
    max_depth: int = 64
    tag: str = field(default="fixed-point", compare=False)

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.max_depth < 1:
            raise ValueError("max_depth must be positive")

    def evaluate(self, u, v) -> Estimate:
        return eval_fixed_point(self, u, v)

    def __call__(self, u, v):
        return eval_fixed_point(self, u, v).value


def eval_fixed_point(F: FixedPointEvaluator, u, v) -> Estimate:
    _check_unit(u, v)
    exact = _exact(u, v)
    if exact:
        u, v = Fraction(u), Fraction(v)
    tb = _tables(F.matrix, exact)
    acc = 0 * u
    mult = 1 if exact else 1.0
    for _ in range(F.max_depth):
        b = _boundary_value(u, v)
        if b is not None:
            return Estimate(acc + mult * b, 0.0)
        if abs(mult) <= F.tolerance:
            return Estimate(acc + mult * u * v, float(abs(mult)))
        affine, t, u, v = _step(tb, u, v)
        acc += mult * affine
        if t == 0:
            return Estimate(acc, 0.0)
        mult *= t
    b = _boundary_value(u, v)
    if b is not None:
        return Estimate(acc + mult * b, 0.0)
    return Estimate(acc + mult * u * v, float(abs(mult)))


def _estimate(Q: Evaluable, u, v) -> Estimate:
    if isinstance(Q, FixedPointEvaluator):
        return Q.evaluate(u, v)
    return Estimate(Q(u, v), 0.0)


def volume(Q: Evaluable, rect) -> Estimate:
    """Signed mass of ``[u1, u2] x [v1, v2]`` by four-corner inclusion-exclusion."""
    u1, u2, v1, v2 = rect
    _check_unit(u1, u2, v1, v2)
    if u1 > u2 or v1 > v2:
        raise OutOfDomain(f"rectangle corners out of order: {rect}")
    if u1 == u2 or v1 == v2:
        return Estimate(0 * u1, 0.0)
    corners = [_estimate(Q, u2, v2), _estimate(Q, u1, v2), _estimate(Q, u2, v1), _estimate(Q, u1, v1)]
    value = corners[0].value - corners[1].value - corners[2].value + corners[3].value
    return Estimate(value, sum(c.error_bound for c in corners))


# -- cells and affine pieces --------------------------------------------------

@dataclass(frozen=True)
class CellPath:
    """A depth-l cell, given by its one-based (column, row) pair at each level."""

    cells: tuple[tuple[int, int], ...]

    @property
    def depth(self) -> int:
        return len(self.cells)

    def rect(self, M: QtMatrix2) -> tuple[Fraction, Fraction, Fraction, Fraction]:
        """Exact ``(u1, u2, v1, v2)``."""
        P = partitions(M)
        u1, v1 = Fraction(0), Fraction(0)
        w, h = Fraction(1), Fraction(1)
        for i, j in self.cells:
            u1 += w * P.p[i - 1]
            v1 += h * P.q[j - 1]
            w *= P.p[i] - P.p[i - 1]
            h *= P.q[j] - P.q[j - 1]
        return u1, u1 + w, v1, v1 + h

    def mass(self, M: QtMatrix2) -> Fraction:
        out = Fraction(1)
        for i, j in self.cells:
            out *= M.t(i, j)
        return out


@dataclass(frozen=True)
class AffineCoefficients:
    g1: Fraction
    g2: Fraction
    g3: Fraction

    def __call__(self, u, v):
        if isinstance(u, float) or isinstance(v, float):
            return float(self.g1) + float(self.g2) * u + float(self.g3) * v
        return self.g1 + self.g2 * u + self.g3 * v


def affine_coefficients(M: QtMatrix2, path: CellPath | Sequence[tuple[int, int]]) -> AffineCoefficients:
    """Exact coefficients of the fixed point on a cell whose last entry is zero."""
    if not isinstance(path, CellPath):
        path = CellPath(tuple(tuple(c) for c in path))
    if not path.cells:
        raise ValueError("empty path")
    i_last, j_last = path.cells[-1]
    if M.t(i_last, j_last) != 0:
        raise PathMassNonzero(f"cell {path.cells[-1]} has entry {M.t(i_last, j_last)}")
    tb = _tables(M, True)
    g1, g2, g3 = Fraction(0), Fraction(0), Fraction(0)
    # innermost level first; g is affine in that level's rescaled coordinates
    for i, j in reversed(path.cells):
        a, b = i - 1, j - 1
        t = tb.t[a][b]
        cx = tb.col[a][b] + t * g2
        cy = tb.row[a][b] + t * g3
        c0 = tb.below[a][b] + t * g1
        w, h = tb.w[a], tb.h[b]
        g2 = cx / w
        g3 = cy / h
        g1 = c0 - cx * tb.p[a] / w - cy * tb.q[b] / h
    return AffineCoefficients(g1, g2, g3)


def zero_cells(M: QtMatrix2, max_depth: int) -> list[CellPath]:
    """Cells of depth <= max_depth whose last entry is zero and earlier entries nonzero."""
    nz = M.nonzero_cells()
    zeros = [(i, j) for i in range(1, M.order + 1) for j in range(1, M.order + 1) if M.t(i, j) == 0]
    out = []
    prefixes: list[tuple] = [()]
    for _ in range(max_depth):
        out += [CellPath(pre + (z,)) for pre in prefixes for z in zeros]
        prefixes = [pre + (c,) for pre in prefixes for c in nz]
    return out


# -- axioms --------------------------------------------------------------------

@dataclass
class AxiomReport:
    samples: int
    slack: float
    boundary_worst: float
    monotone_worst: float
    lipschitz_worst: float

    @property
    def boundary_ok(self) -> bool:
        return self.boundary_worst <= self.slack

    @property
    def monotone_ok(self) -> bool:
        return self.monotone_worst <= self.slack

    @property
    def lipschitz_ok(self) -> bool:
        return self.lipschitz_worst <= self.slack

    @property
    def ok(self) -> bool:
        return self.boundary_ok and self.monotone_ok and self.lipschitz_ok


def axiom_report(Q: Evaluable, samples: int = 10_000, seed: int = 0, slack: float | None = None) -> AxiomReport:
    """Sample the boundary, monotonicity and Lipschitz conditions.

    Violations are measured as amounts by which each inequality fails; the
    default slack is twice the evaluator tolerance (zero for closed forms,
    apart from a few ulps).
    """
    if slack is None:
        tol = Q.tolerance if isinstance(Q, FixedPointEvaluator) else 0.0
        slack = 2 * tol + 1e-14
    rng = np.random.default_rng(seed)

    grid = np.linspace(0.0, 1.0, 101)
    bworst = 0.0
    for t in grid:
        t = float(t)
        bworst = max(bworst, abs(Q(t, 0.0)), abs(Q(0.0, t)), abs(Q(t, 1.0) - t), abs(Q(1.0, t) - t))

    a = rng.random((samples, 2))
    # mix of far and near partners so the Lipschitz check sees small scales
    scale = 10.0 ** rng.uniform(-6, 0, size=(samples, 1))
    b = np.clip(a + scale * rng.uniform(-1, 1, size=(samples, 2)), 0.0, 1.0)
    mworst = 0.0
    lworst = 0.0
    for (u1, v1), (u2, v2) in zip(a.tolist(), b.tolist()):
        q1 = Q(u1, v1)
        q2 = Q(u2, v2)
        lworst = max(lworst, abs(q1 - q2) - (abs(u1 - u2) + abs(v1 - v2)))
        lo_u, hi_u = min(u1, u2), max(u1, u2)
        lo_v, hi_v = min(v1, v2), max(v1, v2)
        # the pair (lo, hi) is ordered in both coordinates
        mworst = max(mworst, Q(lo_u, lo_v) - Q(hi_u, hi_v))
        # and so is each single-coordinate move
        mworst = max(mworst, Q(lo_u, v1) - Q(hi_u, v1), Q(u1, lo_v) - Q(u1, hi_v))
    return AxiomReport(samples, slack, bworst, max(mworst, 0.0), max(lworst, 0.0))


def bumpy_product(u, v):
    """u*v plus a bump steep enough to break monotonicity and the Lipschitz bound."""
    return u * v + 0.2 * math.sin(2 * math.pi * u) * math.sin(math.pi * v)


# -- grid export -------------------------------------------------------------------

def grid_rows(F: FixedPointEvaluator, n: int):
    """Yield ``(u, v, value, error_bound)`` over an n x n uniform grid, u outer."""
    if n < 2:
        raise ValueError("grid needs n >= 2")
    for a in range(n):
        for b in range(n):
            u, v = Fraction(a, n - 1), Fraction(b, n - 1)
            est = F.evaluate(u, v)
            yield u, v, est.value, est.error_bound


def grid_csv(F: FixedPointEvaluator, n: int) -> str:
    lines = ["u,v,value,error_bound"]
    for u, v, val, err in grid_rows(F, n):
        lines.append(f"{float(u):.17g},{float(v):.17g},{float(val):.17g},{float(err):.17g}")
    return "\n".join(lines) + "\n"


def parse_number(s: str):
    """``"p/q"`` or integer strings become Fractions; decimals stay floats."""
    s = s.strip()
    if "/" in s or s.lstrip("+-").isdigit():
        return to_fraction(s)
    return float(s)
