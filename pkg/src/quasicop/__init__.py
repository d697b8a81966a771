"""Quasi-copulas generated by quasi-transformation matrices and the fractal geometry of their supports."""

from .eval2d import FixedPointEvaluator, apply_T, eval_fixed_point, volume
from .ifs_support import enumerate_support, solve_moran
from .multi_nd import MultiMatrix, lattice_eval, make_cube_matrix, make_step_matrix, validate_nd
from .qt_matrix import QtMatrix2, build_matrix, canonical_matrix, from_rows

__all__ = [
    "FixedPointEvaluator",
    "MultiMatrix",
    "QtMatrix2",
    "apply_T",
    "build_matrix",
    "canonical_matrix",
    "enumerate_support",
    "eval_fixed_point",
    "from_rows",
    "lattice_eval",
    "make_cube_matrix",
    "make_step_matrix",
    "solve_moran",
    "validate_nd",
    "volume",
]
