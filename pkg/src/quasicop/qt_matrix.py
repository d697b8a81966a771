"""Bivariate quasi-transformation matrices with exact rational entries.

Entries are addressed ``(i, j)`` with ``i`` the column and ``j`` the row,
rows counted from the bottom.  Indices are zero-based internally; the
one-based indices used in error messages and in ``cell`` tuples returned to
callers follow the usual mathematical convention.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np


def to_fraction(x) -> Fraction:
    """Parse ``x`` (int, Fraction, ``"p/q"`` string, or float) as a Fraction.

    Floats are converted through their shortest decimal repr so that ``0.1``
    becomes ``1/10`` rather than the binary expansion.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, (float, np.floating)):
        return Fraction(repr(float(x)))
    return Fraction(str(x).strip())


def fraction_str(x: Fraction) -> str:
    return str(Fraction(x))


class ValidationFailure(ValueError):
    """A raw grid is not a quasi-transformation matrix."""

    code = "?"


class NotSquare(ValidationFailure):
    code = "shape"


class OrderTooSmall(ValidationFailure):
    code = "shape"


class SumNotOne(ValidationFailure):
    code = "a"

    def __init__(self, total: Fraction):
        super().__init__(f"condition (a): entries sum to {total}, not 1")
        self.total = total


class NonpositiveLine(ValidationFailure):
    code = "b"

    def __init__(self, axis: str, index: int, total: Fraction):
        super().__init__(f"condition (b): {axis} {index} sums to {total}")
        self.axis = axis
        self.index = index
        self.total = total


class NegativeBoundarySubmatrix(ValidationFailure):
    code = "c"

    def __init__(self, corners: tuple[tuple[int, int], tuple[int, int]], total: Fraction):
        (i1, j1), (i2, j2) = corners
        super().__init__(
            f"condition (c): block columns {i1}..{i2}, rows {j1}..{j2} sums to {total}"
        )
        self.corners = corners
        self.total = total


class ParameterOutOfRange(ValueError):
    pass


def _prefix(grid: np.ndarray) -> np.ndarray:
    """Exclusive 2-D prefix sums: ``S[a, b] = sum(grid[:a, :b])``."""
    m1, m2 = grid.shape
    S = np.empty((m1 + 1, m2 + 1), dtype=object)
    S[0, :] = Fraction(0)
    S[:, 0] = Fraction(0)
    for a in range(m1):
        run = Fraction(0)
        for b in range(m2):
            run += grid[a, b]
            S[a + 1, b + 1] = S[a, b + 1] + run
    return S


def _block_sum(S: np.ndarray, i1: int, i2: int, j1: int, j2: int) -> Fraction:
    # zero-based inclusive block [i1..i2] x [j1..j2]
    return S[i2 + 1, j2 + 1] - S[i1, j2 + 1] - S[i2 + 1, j1] + S[i1, j1]


@dataclass(frozen=True)
class PartitionPair:
    p: tuple[Fraction, ...]
    q: tuple[Fraction, ...]


class QtMatrix2:
    """A validated quasi-transformation matrix.

    Do not call the constructor directly; use :func:`build_matrix`,
    :func:`from_rows` or :func:`canonical_matrix`.
    """

    __slots__ = ("entries", "prefix", "abs_prefix", "_partitions")

    def __init__(self, entries: np.ndarray, prefix: np.ndarray):
        self.entries = entries
        self.entries.flags.writeable = False
        self.prefix = prefix
        self.prefix.flags.writeable = False
        self.abs_prefix = _prefix(np.vectorize(abs, otypes=[object])(entries))
        self.abs_prefix.flags.writeable = False
        col = [sum(entries[i, :], Fraction(0)) for i in range(self.order)]
        row = [sum(entries[:, j], Fraction(0)) for j in range(self.order)]
        p = [Fraction(0)]
        q = [Fraction(0)]
        for c, r in zip(col, row):
            p.append(p[-1] + c)
            q.append(q[-1] + r)
        self._partitions = PartitionPair(tuple(p), tuple(q))

    @property
    def order(self) -> int:
        return self.entries.shape[0]

    def t(self, i: int, j: int) -> Fraction:
        """Entry at one-based column ``i``, row ``j``."""
        return self.entries[i - 1, j - 1]

    @property
    def is_proper(self) -> bool:
        return any(x < 0 for x in self.entries.flat)

    def nonzero_cells(self) -> list[tuple[int, int]]:
        """One-based (column, row) pairs with nonzero entry, column-major."""
        m = self.order
        return [(i + 1, j + 1) for i in range(m) for j in range(m) if self.entries[i, j] != 0]

    def rows_top_first(self) -> list[list[Fraction]]:
        m = self.order
        return [[self.entries[i, j] for i in range(m)] for j in reversed(range(m))]

    def as_float(self) -> np.ndarray:
        return self.entries.astype(float)

    def __eq__(self, other) -> bool:
        return isinstance(other, QtMatrix2) and np.array_equal(self.entries, other.entries)

    def __hash__(self):
        return hash(tuple(self.entries.flat))

    def __repr__(self) -> str:
        rows = "; ".join(" ".join(fraction_str(x) for x in r) for r in self.rows_top_first())
        return f"QtMatrix2([{rows}])"


def build_matrix(raw_entries: Sequence[Sequence]) -> QtMatrix2:
    """Validate ``raw_entries[i][j]`` (column ``i``, row ``j`` from the bottom).

    Raises the :class:`ValidationFailure` subclass for the first violated
    condition: (a) total sum is 1, (b) every row and column sum is positive,
    (c) every contiguous block touching the first or last row or column has
    nonnegative sum.  Blocks are scanned with ``(i1, i2, j1, j2)`` in
    lexicographic order and the first negative one is reported.
    """
    rows = [list(r) for r in raw_entries]
    m = len(rows)
    if any(len(r) != m for r in rows):
        raise NotSquare(f"grid is not square: {m} columns of lengths {[len(r) for r in rows]}")
    if m < 2:
        raise OrderTooSmall(f"order must be at least 2, got {m}")
    grid = np.empty((m, m), dtype=object)
    for i in range(m):
        for j in range(m):
            grid[i, j] = to_fraction(rows[i][j])

    S = _prefix(grid)
    total = S[m, m]
    if total != 1:
        raise SumNotOne(total)
    for i in range(m):
        c = _block_sum(S, i, i, 0, m - 1)
        if c <= 0:
            raise NonpositiveLine("column", i + 1, c)
    for j in range(m):
        r = _block_sum(S, 0, m - 1, j, j)
        if r <= 0:
            raise NonpositiveLine("row", j + 1, r)
    for i1 in range(m):
        for i2 in range(i1, m):
            for j1 in range(m):
                for j2 in range(j1, m):
                    if not (i1 == 0 or i2 == m - 1 or j1 == 0 or j2 == m - 1):
                        continue
                    s = _block_sum(S, i1, i2, j1, j2)
                    if s < 0:
                        raise NegativeBoundarySubmatrix(((i1 + 1, j1 + 1), (i2 + 1, j2 + 1)), s)

    # implied by (a)-(c); a failure here is a bug, not bad input
    assert all(Fraction(-1, 3) <= x <= 1 for x in grid.flat), "entry outside [-1/3, 1]"
    return QtMatrix2(grid, S)


def from_rows(rows_top_first: Sequence[Sequence]) -> QtMatrix2:
    """Build from rows written the way they are displayed: top row first."""
    rows = [list(r) for r in rows_top_first]
    m = len(rows)
    if any(len(r) != m for r in rows):
        raise NotSquare("grid is not square")
    return build_matrix([[rows[m - 1 - j][i] for j in range(m)] for i in range(m)])


def partitions(M: QtMatrix2) -> PartitionPair:
    """Cumulative column sums ``p`` and row sums ``q`` (both start at 0, end at 1)."""
    return M._partitions


@dataclass(frozen=True)
class SelfSimilarity:
    holds: bool
    ratios: tuple[Fraction, ...]


def self_similarity_check(M: QtMatrix2) -> SelfSimilarity:
    """Check that every nonzero cell is a square.

    ``ratios`` lists the side lengths of nonzero cells (column-major order)
    when the check holds, and is empty otherwise.
    """
    P = partitions(M)
    ratios = []
    holds = True
    for i, j in M.nonzero_cells():
        w = P.p[i] - P.p[i - 1]
        h = P.q[j] - P.q[j - 1]
        if w != h:
            holds = False
        ratios.append(w)
    return SelfSimilarity(holds, tuple(ratios) if holds else ())


T0_ROWS = [
    ["0", "1/3", "0"],
    ["1/3", "-1/3", "1/3"],
    ["0", "1/3", "0"],
]


def t0_matrix() -> QtMatrix2:
    return from_rows(T0_ROWS)


def tr_matrix(r) -> QtMatrix2:
    """The 4x4 proper matrix with one big cell of side ``1 - r`` and a 3x3 block of side ``r/3`` cells."""
    r = to_fraction(r)
    if not 0 < r < 1:
        raise ParameterOutOfRange(f"r must lie in ]0,1[, got {r}")
    a, b = r / 15, r / 5
    z = Fraction(0)
    return from_rows([
        [z, a, b, a],
        [z, b, -a, b],
        [z, a, b, a],
        [1 - r, z, z, z],
    ])


def canonical_matrix(kind: str, r=None) -> QtMatrix2:
    """``kind`` is ``"T0"`` or ``"Tr"`` (the latter needs ``r``)."""
    k = kind.lower()
    if k == "t0":
        return t0_matrix()
    if k == "tr":
        if r is None:
            raise ParameterOutOfRange("Tr needs a parameter r")
        return tr_matrix(r)
    raise ValueError(f"unknown canonical matrix {kind!r}")


# -- text format -------------------------------------------------------------

def dumps_matrix(M: QtMatrix2) -> str:
    lines = [f"order {M.order}"]
    lines += [" ".join(fraction_str(x) for x in row) for row in M.rows_top_first()]
    return "\n".join(lines) + "\n"


def parse_matrix_rows(text: str) -> list[list[Fraction]]:
    """Parse the text format into rows (top row first) without validating."""
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise ValueError("empty matrix file")
    head = lines[0].split()
    if len(head) != 2 or head[0] != "order":
        raise ValueError(f"first line must be 'order m', got {lines[0]!r}")
    m = int(head[1])
    body = lines[1:]
    if len(body) != m:
        raise ValueError(f"expected {m} rows, found {len(body)}")
    rows = [[Fraction(tok) for tok in ln.split()] for ln in body]
    return rows


def loads_matrix(text: str) -> QtMatrix2:
    return from_rows(parse_matrix_rows(text))


def write_matrix(M: QtMatrix2, path) -> None:
    Path(path).write_text(dumps_matrix(M))


def read_matrix(path) -> QtMatrix2:
    return loads_matrix(Path(path).read_text())

