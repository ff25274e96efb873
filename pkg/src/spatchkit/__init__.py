"""Hermite bicubic patches constrained to cubic diagonals (S-Patches)."""

__version__ = "0.1.0"

from .algebra import Matrix, Mode, Poly
from .continuity import PatchComplex, check_continuity, half_cube_demo, join_edge
from .hermite import HermiteCurve, Patch3, boundary_curve, curve_eval, patch_eval, patch_normal, patch_partials
from .spatch import (
    DiagonalKind,
    SPatch,
    build_constraint_system,
    check_spatch,
    construct_spatch,
    diagonal_coeffs,
    diagonal_oracle,
)
from .tessellation import TessellationPattern, TriangleMesh, tessellate

__all__ = [
    "DiagonalKind",
    "HermiteCurve",
    "Matrix",
    "Mode",
    "Patch3",
    "PatchComplex",
    "Poly",
    "SPatch",
    "TessellationPattern",
    "TriangleMesh",
    "boundary_curve",
    "build_constraint_system",
    "check_continuity",
    "check_spatch",
    "construct_spatch",
    "curve_eval",
    "diagonal_coeffs",
    "diagonal_oracle",
    "half_cube_demo",
    "join_edge",
    "patch_eval",
    "patch_normal",
    "patch_partials",
    "tessellate",
]
