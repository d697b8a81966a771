"""Supports of matrix fixed points as attractors of axis-aligned affine maps.

The support of the fixed point of ``T`` is the attractor of the maps
``(u, v) -> (alpha_i(u), beta_j(v))`` over the cells with ``t_ij != 0``.
Depth-l approximations are enumerated exactly: corner coordinates are kept
as integer numerators over ``D**l``, where ``D`` is the common denominator
of the partition points on that axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .qt_matrix import QtMatrix2, partitions, to_fraction

DEFAULT_BUDGET = 10**7


class BudgetExceeded(RuntimeError):
    def __init__(self, count: int, budget: int):
        super().__init__(f"{count} rectangles requested, budget is {budget}")
        self.count = count
        self.budget = budget


class NoRootInRange(ValueError):
    pass


class DegenerateScales(ValueError):
    pass


class ParameterOutOfRange(ValueError):
    pass


@dataclass(frozen=True)
class SimilarityMap:
    """``(u, v) -> (u0 + width*u, v0 + height*v)`` for one matrix cell."""

    cell: tuple[int, int]
    u0: Fraction
    width: Fraction
    v0: Fraction
    height: Fraction
    mass: Fraction

    @property
    def is_similarity(self) -> bool:
        return self.width == self.height

    @property
    def ratio(self) -> Fraction:
        if not self.is_similarity:
            raise ValueError(f"cell {self.cell} is {self.width} x {self.height}, not a square")
        return self.width

    def __call__(self, u, v):
        return self.u0 + self.width * u, self.v0 + self.height * v


def nonzero_maps(M: QtMatrix2) -> list[SimilarityMap]:
    P = partitions(M)
    return [
        SimilarityMap((i, j), P.p[i - 1], P.p[i] - P.p[i - 1], P.q[j - 1], P.q[j] - P.q[j - 1], M.t(i, j))
        for i, j in M.nonzero_cells()
    ]


def all_similarities(maps: Sequence[SimilarityMap]) -> bool:
    return all(f.is_similarity for f in maps)


def moran_check(maps: Sequence[SimilarityMap]) -> bool:
    """Open set condition with the open unit square as witness.

    Every image must lie in the closed square and no two images may share
    interior points.
    """
    for f in maps:
        if f.width <= 0 or f.height <= 0:
            return False
        if f.u0 < 0 or f.v0 < 0 or f.u0 + f.width > 1 or f.v0 + f.height > 1:
            return False
    for a in range(len(maps)):
        f = maps[a]
        for b in range(a + 1, len(maps)):
            g = maps[b]
            overlap_u = min(f.u0 + f.width, g.u0 + g.width) - max(f.u0, g.u0)
            overlap_v = min(f.v0 + f.height, g.v0 + g.height) - max(f.v0, g.v0)
            if overlap_u > 0 and overlap_v > 0:
                return False
    return True


# -- attractor enumeration ----------------------------------------------------------

@dataclass(frozen=True)
class SignedRect:
    i_path: tuple[int, ...]
    j_path: tuple[int, ...]
    corners: tuple[Fraction, Fraction, Fraction, Fraction]  # u1, u2, v1, v2
    mass: Fraction

    @property
    def sign(self) -> int:
        return 1 if self.mass > 0 else -1

    def to_json(self) -> dict:
        u1, u2, v1, v2 = self.corners
        return {
            "i_path": list(self.i_path),
            "j_path": list(self.j_path),
            "corners": [[str(u1), str(v1)], [str(u2), str(v2)]],
            "mass": str(self.mass),
        }


def _axis_ints(points: Sequence[Fraction]) -> tuple[int, list[int]]:
    D = math.lcm(*(x.denominator for x in points))
    return D, [int(x * D) for x in points]


@dataclass
class SupportApprox:
    """All nonzero depth-l cells, in lexicographic path order.

    ``paths[k, level]`` indexes into ``cells``; ``u_lo``/``u_len`` (and the
    ``v`` analogues) are integer numerators over ``u_den``/``v_den``.
    """

    matrix: QtMatrix2
    depth: int
    cells: list[tuple[int, int]]
    paths: np.ndarray
    u_lo: np.ndarray
    u_len: np.ndarray
    u_den: int
    v_lo: np.ndarray
    v_len: np.ndarray
    v_den: int
    signs: np.ndarray
    _masses: list[Fraction] | None = field(default=None, repr=False)

    def __len__(self) -> int:
        return len(self.signs)

    def masses(self) -> list[Fraction]:
        if self._masses is None:
            t = [self.matrix.t(i, j) for i, j in self.cells]
            out = []
            for row in self.paths.tolist():
                m = Fraction(1)
                for k in row:
                    if k >= 0:
                        m *= t[k]
                out.append(m)
            self._masses = out
        return self._masses

    def total_mass(self) -> Fraction:
        return sum(self.masses(), Fraction(0))

    def corners(self, k: int) -> tuple[Fraction, Fraction, Fraction, Fraction]:
        ul, uw = int(self.u_lo[k]), int(self.u_len[k])
        vl, vh = int(self.v_lo[k]), int(self.v_len[k])
        return (
            Fraction(ul, self.u_den),
            Fraction(ul + uw, self.u_den),
            Fraction(vl, self.v_den),
            Fraction(vl + vh, self.v_den),
        )

    def rect(self, k: int) -> SignedRect:
        row = [c for c in self.paths[k].tolist() if c >= 0]
        return SignedRect(
            tuple(self.cells[c][0] for c in row),
            tuple(self.cells[c][1] for c in row),
            self.corners(k),
            self.masses()[k],
        )

    def rects(self) -> list[SignedRect]:
        return [self.rect(k) for k in range(len(self))]

    def area(self) -> Fraction:
        """Total area of the cells (they have disjoint interiors)."""
        return Fraction(int(np.sum(self.u_len * self.v_len, dtype=object)), self.u_den * self.v_den)

    def to_json(self) -> list[dict]:
        return [r.to_json() for r in self.rects()]


def _int_dtype(limit: int):
    return np.int64 if limit < 2**62 else object


def enumerate_support(M: QtMatrix2, depth: int, budget: int = DEFAULT_BUDGET) -> SupportApprox:
    """Enumerate the depth-``depth`` cells carrying nonzero mass."""
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    cells = M.nonzero_cells()
    count = len(cells) ** depth
    if count > budget:
        raise BudgetExceeded(count, budget)
    P = partitions(M)
    Du, pu = _axis_ints(P.p)
    Dv, pv = _axis_ints(P.q)
    ci = [i - 1 for i, _ in cells]
    cj = [j - 1 for _, j in cells]
    # headroom for rasterization, which multiplies numerators by the resolution
    dtype = _int_dtype(max(Du, Dv) ** (depth + 1) * 2**20)
    lo_u_cell = np.array([pu[i] for i in ci], dtype=dtype)
    len_u_cell = np.array([pu[i + 1] - pu[i] for i in ci], dtype=dtype)
    lo_v_cell = np.array([pv[j] for j in cj], dtype=dtype)
    len_v_cell = np.array([pv[j + 1] - pv[j] for j in cj], dtype=dtype)
    sign_cell = np.array([1 if M.t(i, j) > 0 else -1 for i, j in cells], dtype=np.int8)

    k = len(cells)
    u_lo = np.zeros(1, dtype=dtype)
    u_len = np.ones(1, dtype=dtype)
    v_lo = np.zeros(1, dtype=dtype)
    v_len = np.ones(1, dtype=dtype)
    signs = np.ones(1, dtype=np.int8)
    paths = np.zeros((1, 0), dtype=np.int32)
    for _ in range(depth):
        u_lo = (u_lo[:, None] * Du + u_len[:, None] * lo_u_cell[None, :]).ravel()
        u_len = (u_len[:, None] * len_u_cell[None, :]).ravel()
        v_lo = (v_lo[:, None] * Dv + v_len[:, None] * lo_v_cell[None, :]).ravel()
        v_len = (v_len[:, None] * len_v_cell[None, :]).ravel()
        signs = (signs[:, None] * sign_cell[None, :]).ravel()
        n = paths.shape[0]
        paths = np.concatenate(
            [np.repeat(paths, k, axis=0), np.tile(np.arange(k, dtype=np.int32), n)[:, None]], axis=1
        )
    return SupportApprox(M, depth, cells, paths, u_lo, u_len, Du**depth, v_lo, v_len, Dv**depth, signs)


def enumerate_cover(M: QtMatrix2, max_side, min_depth: int = 1, budget: int = DEFAULT_BUDGET) -> SupportApprox:
    """Cut-set cover: refine every path until its cell is no wider or taller than ``max_side``.

    Unlike :func:`enumerate_support`, cells end at different depths, so a
    single cover has comparable cell sizes everywhere.  ``paths`` is padded
    with -1 after a path's last level and ``depth`` is the deepest level used.
    """
    eps = to_fraction(max_side)
    if not 0 < eps:
        raise ValueError("max_side must be positive")
    cells = M.nonzero_cells()
    P = partitions(M)
    Du, pu = _axis_ints(P.p)
    Dv, pv = _axis_ints(P.q)
    idx = np.arange(len(cells))
    cu_lo = [pu[i - 1] for i, _ in cells]
    cu_len = [pu[i] - pu[i - 1] for i, _ in cells]
    cv_lo = [pv[j - 1] for _, j in cells]
    cv_len = [pv[j] - pv[j - 1] for _, j in cells]
    csign = [1 if M.t(i, j) > 0 else -1 for i, j in cells]

    # each active entry: (path, u_lo, u_len, v_lo, v_len, sign) over Du**d, Dv**d
    active = [((), 0, 1, 0, 1, 1)]
    done: list[tuple[tuple[int, ...], int, int, int, int, int, int]] = []
    d = 0
    while active:
        if len(active) * len(cells) + len(done) > budget:
            raise BudgetExceeded(len(active) * len(cells) + len(done), budget)
        d += 1
        nxt = []
        for path, ul, uw, vl, vh, sg in active:
            for k in idx:
                item = (
                    path + (int(k),),
                    ul * Du + uw * cu_lo[k],
                    uw * cu_len[k],
                    vl * Dv + vh * cv_lo[k],
                    vh * cv_len[k],
                    sg * csign[k],
                )
                fine = Fraction(item[2], Du**d) <= eps and Fraction(item[4], Dv**d) <= eps
                if fine and d >= min_depth:
                    done.append(item + (d,))
                else:
                    nxt.append(item)
        active = nxt
    L = d
    dtype = _int_dtype(max(Du, Dv) ** (L + 1) * 2**20)
    paths = np.full((len(done), L), -1, dtype=np.int32)
    u_lo = np.empty(len(done), dtype=dtype)
    u_len = np.empty(len(done), dtype=dtype)
    v_lo = np.empty(len(done), dtype=dtype)
    v_len = np.empty(len(done), dtype=dtype)
    signs = np.empty(len(done), dtype=np.int8)
    for n, (path, ul, uw, vl, vh, sg, dd) in enumerate(done):
        paths[n, :dd] = path
        su, sv = Du ** (L - dd), Dv ** (L - dd)
        u_lo[n], u_len[n], v_lo[n], v_len[n] = ul * su, uw * su, vl * sv, vh * sv
        signs[n] = sg
    return SupportApprox(M, L, cells, paths, u_lo, u_len, Du**L, v_lo, v_len, Dv**L, signs)


# -- dimension equations --------------------------------------------------------------

@dataclass(frozen=True)
class DimensionReport:
    ratios: tuple[float, ...]
    s: float
    residual: float
    bracket: tuple[float, float]
    iterations: int

    def to_json(self) -> dict:
        return {
            "ratios": list(self.ratios),
            "s": self.s,
            "residual": self.residual,
            "bracket": list(self.bracket),
            "iterations": self.iterations,
        }


def bisect_decreasing(f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-12,
                      max_iter: int = 200):
    """Root of a strictly decreasing ``f`` with ``f(lo) > 0 > f(hi)``.

    Stops once ``|f(mid)| <= tol`` and the bracket is at machine resolution,
    or ``f(mid) == 0``.  Returns ``(root, residual, (lo, hi), iterations)``
    with the sign condition still holding at the returned bracket.
    """
    flo, fhi = f(lo), f(hi)
    if not (flo > 0 > fhi):
        raise NoRootInRange(f"f({lo}) = {flo}, f({hi}) = {fhi} do not bracket a root")
    mid, fmid = lo, flo
    it = 0
    for it in range(1, max_iter + 1):
        mid = 0.5 * (lo + hi)
        fmid = f(mid)
        if fmid == 0:
            break
        if fmid > 0:
            lo = mid
        else:
            hi = mid
        if abs(fmid) <= tol and hi - lo <= 4 * math.ulp(max(abs(hi), 1.0)):
            break
    return mid, abs(fmid), (lo, hi), it


def solve_moran(ratios: Sequence, tol: float = 1e-12, ambient: float = 2.0) -> DimensionReport:
    """Solve ``sum(c**s) = 1`` for the similarity dimension ``s``."""
    cs = [float(c) for c in ratios]
    if not cs:
        raise NoRootInRange("no ratios")
    if any(not 0 < c < 1 for c in cs):
        raise ValueError("every ratio must lie in ]0,1[")
    if len(cs) <= 1:
        raise NoRootInRange(f"{len(cs)} map(s): sum of c**0 is {len(cs)} <= 1, no positive root")
    arr = np.array(cs)

    def f(s):
        return float(np.sum(arr**s)) - 1.0

    lo = 1e-9
    hi = float(ambient)
    while f(hi) >= 0:
        hi *= 2
    s, res, bracket, it = bisect_decreasing(f, lo, hi, tol)
    return DimensionReport(tuple(cs), s, res, bracket, it)


def family_equation(s: float, r: float, n: int = 2) -> float:
    """``(1 - r)**s + 3**n * (r/3)**s``; its level set 1 gives the dimension."""
    return (1 - r) ** s + 3**n * (r / 3) ** s


def family_equation_dr(s: float, r: float, n: int = 2) -> float:
    """Partial derivative of :func:`family_equation` in ``r``."""
    return s * (-((1 - r) ** (s - 1)) + 3 ** (n - 1) * (r / 3) ** (s - 1))


def critical_r(s: float) -> float:
    """The unique ``r`` in ]0,1[ where the planar family equation is stationary in ``r``."""
    if not 1 < s < 2:
        raise ParameterOutOfRange(f"s must lie in ]1,2[, got {s}")
    k = 3 ** (1 - 1 / (s - 1))
    return k / (1 + k)


def s_of_r(r, n: int = 2, tol: float = 1e-14) -> DimensionReport:
    r = float(r)
    if not 0 < r < 1:
        raise ParameterOutOfRange(f"r must lie in ]0,1[, got {r}")
    if n < 2:
        raise ParameterOutOfRange("ambient dimension must be at least 2")
    s, res, bracket, it = bisect_decreasing(lambda s: family_equation(s, r, n) - 1.0, 1.0, float(n), tol)
    return DimensionReport((1 - r,) + (r / 3,) * 3**n, s, res, bracket, it)


def r_of_s(s, n: int = 2, tol: float = 1e-14) -> float:
    """Invert ``s_of_r`` by bisection in ``r``."""
    s = float(s)
    if not 1 < s < n:
        raise ParameterOutOfRange(f"s must lie in ]1,{n}[, got {s}")
    lo, hi = 0.0, 1.0
    while hi - lo > 1e-15:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if s_of_r(mid, n, tol).s < s:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def family_dimension(direction: str, value, n: int = 2, tol: float = 1e-14) -> float:
    """``direction`` is ``"s_of_r"`` (value is r) or ``"r_of_s"`` (value is s)."""
    if direction == "s_of_r":
        return s_of_r(value, n, tol).s
    if direction == "r_of_s":
        return r_of_s(value, n, tol)
    raise ValueError(f"unknown direction {direction!r}")


# -- box counting ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BoxCount:
    dim: float
    fit_residual: float
    scales: tuple[float, ...]
    counts: tuple[int, ...]


def count_boxes(mask: np.ndarray, box: int) -> int:
    n = mask.shape[0]
    k = n // box
    return int(mask.reshape(k, box, k, box).any(axis=(1, 3)).sum())


def box_counting_estimate(mask: np.ndarray, scales: Sequence) -> BoxCount:
    """Slope of ``ln N(delta)`` against ``-ln delta``.

    ``mask`` is a square boolean array; each scale ``delta`` is a box side as
    a fraction of the mask side and must correspond to a whole number of
    pixels dividing the resolution.
    """
    mask = np.asarray(mask, dtype=bool)
    if mask.ndim != 2 or mask.shape[0] != mask.shape[1]:
        raise DegenerateScales("mask must be a square 2-D array")
    if not mask.any():
        raise DegenerateScales("mask is empty")
    n = mask.shape[0]
    fracs = sorted({to_fraction(d) for d in scales}, reverse=True)
    if len(fracs) < 3:
        raise DegenerateScales("need at least three distinct scales")
    counts = []
    for d in fracs:
        box = d * n
        if box.denominator != 1 or box < 1 or n % int(box):
            raise DegenerateScales(f"scale {d} is not a whole divisor of resolution {n}")
        counts.append(count_boxes(mask, int(box)))
    x = np.array([-math.log(d) for d in fracs])
    y = np.log(np.array(counts, dtype=float))
    slope, intercept = np.polyfit(x, y, 1)
    resid = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    return BoxCount(float(slope), resid, tuple(float(d) for d in fracs), tuple(counts))
