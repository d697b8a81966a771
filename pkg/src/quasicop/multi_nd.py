"""n-dimensional quasi-transformation matrices.

Entries live in a dense object array of Fractions indexed by zero-based
multi-indices; everything that talks to users (error messages, ``cell``
tuples) is one-based.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .ifs_support import BudgetExceeded, solve_moran
from .qt_matrix import QtMatrix2, ValidationFailure, to_fraction

DEFAULT_BUDGET = 10**6


class OutOfDomain(ValueError):
    pass


class ParameterOutOfRange(ValueError):
    pass


class ShapeError(ValidationFailure):
    code = "shape"


class SumNotOne(ValidationFailure):
    code = "a"

    def __init__(self, total: Fraction):
        super().__init__(f"condition (a): entries sum to {total}, not 1")
        self.total = total


class NonpositiveSlab(ValidationFailure):
    code = "b"

    def __init__(self, axis: int, k: int, total: Fraction):
        super().__init__(f"condition (b): slab {k} along axis {axis} sums to {total}")
        self.axis = axis
        self.k = k
        self.total = total


class ConditionCFailure(ValidationFailure):
    code = "c"

    def __init__(self, r: tuple[int, ...], axis: int, value: Fraction, bound: Fraction):
        super().__init__(
            f"condition (c): partial slab sum {value} at index {r} along axis {axis} "
            f"is outside [0, {bound}]"
        )
        self.r = r
        self.axis = axis
        self.value = value
        self.bound = bound


def _cumsum_all(a: np.ndarray) -> np.ndarray:
    for ax in range(a.ndim):
        a = np.cumsum(a, axis=ax)
    return a


def _zero_pad(a: np.ndarray) -> np.ndarray:
    out = np.empty(tuple(s + 1 for s in a.shape), dtype=object)
    out[...] = Fraction(0)
    out[tuple(slice(1, None) for _ in a.shape)] = a
    return out


class MultiMatrix:
    def __init__(self, entries: np.ndarray):
        arr = np.asarray(entries, dtype=object)
        if arr.ndim < 2:
            raise ShapeError("need at least two axes")
        if any(m < 2 for m in arr.shape):
            raise ShapeError(f"every axis needs at least 2 slabs, shape is {arr.shape}")
        self.entries = np.vectorize(to_fraction, otypes=[object])(arr)
        self.entries.flags.writeable = False

    @property
    def n(self) -> int:
        return self.entries.ndim

    @property
    def shape(self) -> tuple[int, ...]:
        return self.entries.shape

    def t(self, *index: int) -> Fraction:
        """Entry at a one-based multi-index."""
        return self.entries[tuple(i - 1 for i in index)]

    def slab_sums(self, axis: int) -> list[Fraction]:
        return [sum(s.flat, Fraction(0)) for s in np.moveaxis(self.entries, axis, 0)]

    @property
    def axes(self) -> tuple[tuple[Fraction, ...], ...]:
        """Partition points ``0 = a_0 < ... < a_m = 1`` for each axis."""
        out = []
        for ax in range(self.n):
            pts = [Fraction(0)]
            for s in self.slab_sums(ax):
                pts.append(pts[-1] + s)
            out.append(tuple(pts))
        return tuple(out)

    @property
    def is_proper(self) -> bool:
        return any(x < 0 for x in self.entries.flat)

    def nonzero_cells(self) -> list[tuple[int, ...]]:
        return [tuple(i + 1 for i in idx) for idx in np.ndindex(*self.shape) if self.entries[idx] != 0]

    def box(self, index: Sequence[int]) -> tuple[tuple[Fraction, Fraction], ...]:
        """Exact per-axis extent of the box with one-based ``index``."""
        A = self.axes
        return tuple((A[ax][i - 1], A[ax][i]) for ax, i in enumerate(index))

    def __eq__(self, other) -> bool:
        return isinstance(other, MultiMatrix) and np.array_equal(self.entries, other.entries)

    def __hash__(self):
        return hash((self.shape, tuple(self.entries.flat)))

    def __repr__(self) -> str:
        return f"MultiMatrix(shape={self.shape})"


def from_qt(M: QtMatrix2) -> MultiMatrix:
    return MultiMatrix(M.entries)


@dataclass(frozen=True)
class ValidationReport:
    shape: tuple[int, ...]
    proper: bool

    def __str__(self) -> str:
        return "valid, proper" if self.proper else "valid, not proper"


def validate_nd(T: MultiMatrix) -> ValidationReport:
    """Check membership conditions (a)-(c) exactly; raise on the first failure.

    (c) says that for every axis ``j`` and slab ``k`` the prefix sums of the
    slab over the remaining axes stay within ``[0, slab total]``.
    """
    total = sum(T.entries.flat, Fraction(0))
    if total != 1:
        raise SumNotOne(total)
    for ax in range(T.n):
        for k, s in enumerate(T.slab_sums(ax)):
            if s <= 0:
                raise NonpositiveSlab(ax + 1, k + 1, s)
    for ax in range(T.n):
        for k in range(T.shape[ax]):
            slab = np.take(T.entries, k, axis=ax)
            bound = sum(slab.flat, Fraction(0))
            pre = _cumsum_all(slab)
            for idx in np.ndindex(*pre.shape):
                val = pre[idx]
                if val < 0 or val > bound:
                    r = list(i + 1 for i in idx)
                    r.insert(ax, k + 1)
                    raise ConditionCFailure(tuple(r), ax + 1, val, bound)
    return ValidationReport(T.shape, T.is_proper)


def contraction_alpha(T: MultiMatrix) -> Fraction:
    """Largest increment of the cumulative absolute mass along the diagonal step."""
    cum = _zero_pad(_cumsum_all(np.vectorize(abs, otypes=[object])(T.entries)))
    upper = cum[tuple(slice(1, None) for _ in range(T.n))]
    lower = cum[tuple(slice(None, -1) for _ in range(T.n))]
    return max((upper - lower).flat)


# -- the T operator -------------------------------------------------------------------

def product_nd(u):
    out = 1
    for x in u:
        out = out * x
    return out


def upper_nd(u):
    return min(u)


def lower_nd(u):
    return max(sum(u) - len(u) + 1, 0 * u[0])


BASES_ND: dict[str, Callable] = {"Pi": product_nd, "M": upper_nd, "W": lower_nd}


def _rescale(x, lo, hi):
    y = (x - lo) / (hi - lo)
    return min(max(y, 0 * y), 0 * y + 1)


def apply_T_nd(T: MultiMatrix, Q: Callable, u: Sequence):
    """``sum_i t_i Q(r_i(u))`` with the clamped per-axis rescaling ``r_i``."""
    if len(u) != T.n:
        raise OutOfDomain(f"point has {len(u)} coordinates, matrix has {T.n} axes")
    for x in u:
        if not 0 <= x <= 1:
            raise OutOfDomain(f"coordinate {x!r} outside [0, 1]")
    exact = all(isinstance(x, (Fraction, int)) for x in u)
    A = T.axes
    if not exact:
        A = tuple(tuple(float(a) for a in ax) for ax in A)
        u = [float(x) for x in u]
    else:
        u = [Fraction(x) for x in u]
    scaled = [[_rescale(u[ax], A[ax][i], A[ax][i + 1]) for i in range(T.shape[ax])] for ax in range(T.n)]
    total = 0 * u[0]
    for idx in np.ndindex(*T.shape):
        t = T.entries[idx]
        if t == 0:
            continue
        r = [scaled[ax][i] for ax, i in enumerate(idx)]
        if any(x == 0 for x in r):
            continue
        total += (t if exact else float(t)) * Q(r)
    return total


def apply_T_grid(T: MultiMatrix, base: str, grid: np.ndarray) -> np.ndarray:
    """Vectorised ``T(Q)`` on the tensor grid ``grid x ... x grid`` for a closed-form base."""
    A = [np.array([float(a) for a in ax]) for ax in T.axes]
    g = np.asarray(grid, dtype=float)
    n = T.n
    out = np.zeros((len(g),) * n)
    for idx in np.ndindex(*T.shape):
        t = T.entries[idx]
        if t == 0:
            continue
        parts = []
        for ax, i in enumerate(idx):
            r = np.clip((g - A[ax][i]) / (A[ax][i + 1] - A[ax][i]), 0.0, 1.0)
            shape = [1] * n
            shape[ax] = len(g)
            parts.append(r.reshape(shape))
        out += float(t) * _grid_base(base, parts)
    return out


def _grid_base(base: str, parts: list[np.ndarray]) -> np.ndarray:
    if base == "Pi":
        out = parts[0]
        for p in parts[1:]:
            out = out * p
        return out
    if base == "M":
        out = parts[0]
        for p in parts[1:]:
            out = np.minimum(out, p)
        return out
    if base == "W":
        s = parts[0]
        for p in parts[1:]:
            s = s + p
        return np.maximum(s - len(parts) + 1, 0.0)
    raise ValueError(f"unknown base {base!r}")


def base_on_grid(base: str, n: int, grid: np.ndarray) -> np.ndarray:
    g = np.asarray(grid, dtype=float)
    parts = []
    for ax in range(n):
        shape = [1] * n
        shape[ax] = len(g)
        parts.append(g.reshape(shape))
    return np.broadcast_to(_grid_base(base, parts), (len(g),) * n)


def sup_distance_pi_m(n: int) -> float:
    """``sup |M - Pi|`` over the unit cube, attained on the diagonal at ``n**(-1/(n-1))``."""
    x = n ** (-1.0 / (n - 1))
    return x - x**n


# -- exact lattice values ----------------------------------------------------------------

def _kron_power(a: np.ndarray, k: int) -> np.ndarray:
    out = np.ones((1,) * a.ndim, dtype=object)
    out[...] = Fraction(1)
    for _ in range(k):
        out = np.kron(out, a)
    return out


def _axis_points(points: Sequence[Fraction], k: int) -> list[Fraction]:
    """Endpoints of all depth-k intervals of one axis, increasing."""
    cur = [Fraction(0), Fraction(1)]
    for _ in range(k):
        nxt = []
        for i in range(len(points) - 1):
            lo, w = points[i], points[i + 1] - points[i]
            nxt += [lo + w * x for x in cur[:-1]]
        nxt.append(Fraction(1))
        cur = nxt
    return cur


@dataclass
class LatticeValues:
    """Exact fixed-point values on the grid of depth-k cell corners."""

    depth: int
    coords: tuple[tuple[Fraction, ...], ...]
    values: np.ndarray
    masses: np.ndarray

    def index_of(self, point: Sequence) -> tuple[int, ...]:
        out = []
        for ax, x in enumerate(point):
            x = to_fraction(x)
            i = _bisect_left(self.coords[ax], x)
            if i >= len(self.coords[ax]) or self.coords[ax][i] != x:
                raise KeyError(f"{x} is not a depth-{self.depth} lattice coordinate on axis {ax + 1}")
            out.append(i)
        return tuple(out)

    def value_at(self, point: Sequence) -> Fraction:
        return self.values[self.index_of(point)]

    def box_volume(self, lo: Sequence, hi: Sequence) -> Fraction:
        """Inclusion-exclusion over the 2**n corners of a box with lattice corners."""
        a, b = self.index_of(lo), self.index_of(hi)
        vol = Fraction(0)
        for pick in itertools.product((0, 1), repeat=len(a)):
            idx = tuple(b[d] if p else a[d] for d, p in enumerate(pick))
            sign = (-1) ** (len(a) - sum(pick))
            vol += sign * self.values[idx]
        return vol

    def bounds(self, point: Sequence) -> tuple[float, float]:
        """Interval guaranteed to contain the fixed point at an arbitrary ``point``.

        Uses monotonicity between the enclosing lattice corners and the
        Lipschitz condition with modulus 1 per coordinate.
        """
        lo_idx, hi_idx, dlo, dhi = [], [], 0.0, 0.0
        for ax, x in enumerate(point):
            x = to_fraction(x)
            c = self.coords[ax]
            i = _bisect_left(c, x)
            if i < len(c) and c[i] == x:
                lo_idx.append(i)
                hi_idx.append(i)
                continue
            lo_idx.append(i - 1)
            hi_idx.append(i)
            dlo += float(x - c[i - 1])
            dhi += float(c[i] - x)
        qlo = float(self.values[tuple(lo_idx)])
        qhi = float(self.values[tuple(hi_idx)])
        return max(qlo, qhi - dhi), min(qhi, qlo + dlo)

    def to_json(self) -> dict:
        return {
            "depth": self.depth,
            "coords": [[str(x) for x in ax] for ax in self.coords],
            "shape": list(self.values.shape),
            "values": [str(x) for x in self.values.flatten(order="F")],
        }


def _bisect_left(seq, x) -> int:
    lo, hi = 0, len(seq)
    while lo < hi:
        mid = (lo + hi) // 2
        if seq[mid] < x:
            lo = mid + 1
        else:
            hi = mid
    return lo


def lattice_eval(T: MultiMatrix, depth: int, budget: int = DEFAULT_BUDGET) -> LatticeValues:
    """Fixed-point values at every depth-``depth`` cell corner.

    The depth-k cell masses are products of entries along the path (a
    Kronecker power of the entry tensor); the value at a corner is the sum of
    the masses of all cells below and to the left of it.
    """
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    nz = len(T.nonzero_cells())
    dense = math.prod(m**depth for m in T.shape)
    if nz**depth > budget or dense > budget:
        raise BudgetExceeded(max(nz**depth, dense), budget)
    masses = _kron_power(T.entries, depth)
    values = _zero_pad(_cumsum_all(masses))
    coords = tuple(tuple(_axis_points(ax, depth)) for ax in T.axes)
    return LatticeValues(depth, coords, values, masses)


# -- matrix families -------------------------------------------------------------------------

def _family_constant(n: int) -> Fraction:
    return Fraction(3 ** (n - 1) - 1) + Fraction(2 * n - 1, 2 * n - 3)


def make_step_matrix(n: int, r) -> MultiMatrix:
    """4 x ... x 4 matrix: one cube of side ``1 - r`` and 3**n cubes of side ``r/3``."""
    r = to_fraction(r)
    if n < 2:
        raise ParameterOutOfRange(f"n must be at least 2, got {n}")
    if not 0 < r < 1:
        raise ParameterOutOfRange(f"r must lie in ]0,1[, got {r}")
    base = r / 3 / _family_constant(n)
    heavy = Fraction(2 * n - 1, 2 * n - 3) * base
    E = np.empty((4,) * n, dtype=object)
    for idx in np.ndindex(*E.shape):
        one = tuple(i + 1 for i in idx)
        if all(i == 1 for i in one):
            E[idx] = 1 - r
        elif any(i == 1 for i in one):
            E[idx] = Fraction(0)
        elif all(i == 3 for i in one):
            E[idx] = -base
        elif sum(i != 3 for i in one) == 1:
            E[idx] = heavy
        else:
            E[idx] = base
    return MultiMatrix(E)


def make_cube_matrix(n: int) -> MultiMatrix:
    """3 x ... x 3 matrix with all cells cubes of side 1/3 and a negative centre."""
    if n < 2:
        raise ParameterOutOfRange(f"n must be at least 2, got {n}")
    base = Fraction(1, 3) / _family_constant(n)
    heavy = Fraction(2 * n - 1, 2 * n - 3) * base
    E = np.empty((3,) * n, dtype=object)
    for idx in np.ndindex(*E.shape):
        off = sum(i != 1 for i in idx)
        E[idx] = -base if off == 0 else heavy if off == 1 else base
    return MultiMatrix(E)


def solve_dim_nd(n: int, r, tol: float = 1e-14) -> float:
    """Root ``s`` of ``(1 - r)**s + 3**n (r/3)**s = 1`` in ]1, n[.

    Solved as the Moran equation of the step family's cube sides, one ratio
    per nonzero cell.
    """
    r = float(to_fraction(r))
    if n < 2:
        raise ParameterOutOfRange(f"n must be at least 2, got {n}")
    if not 0 < r < 1:
        raise ParameterOutOfRange(f"r must lie in ]0,1[, got {r}")
    return solve_moran([1 - r] + [r / 3] * 3**n, tol, ambient=n).s


# -- JSON format ------------------------------------------------------------------------------

def dumps_nd(T: MultiMatrix) -> str:
    doc = {
        "n": T.n,
        "shape": list(T.shape),
        "entries": [str(x) for x in T.entries.flatten(order="F")],
    }
    return json.dumps(doc, indent=1) + "\n"


def loads_nd(text: str) -> MultiMatrix:
    doc = json.loads(text)
    shape = tuple(int(m) for m in doc["shape"])
    if int(doc["n"]) != len(shape):
        raise ShapeError(f"n = {doc['n']} but shape has {len(shape)} axes")
    flat = [Fraction(x) for x in doc["entries"]]
    if len(flat) != math.prod(shape):
        raise ShapeError(f"{len(flat)} entries for shape {shape}")
    arr = np.empty(len(flat), dtype=object)
    arr[:] = flat
    return MultiMatrix(arr.reshape(shape, order="F"))


def write_nd(T: MultiMatrix, path) -> None:
    Path(path).write_text(dumps_nd(T))


def read_nd(path) -> MultiMatrix:
    return loads_nd(Path(path).read_text())
