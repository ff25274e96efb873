"""Hermite cubic curves and bicubic patches.

A patch coordinate is ``x(u, v) = u^T M_H^T X M_H v`` with power vectors
``u = [u^3, u^2, u, 1]`` and ``v`` likewise.  The 4x4 control matrix ``X``
uses this layout (1-based labels as used throughout the docs, 0-based
indices in code)::

    label  index   meaning
    x11    [0,0]   value at (u,v) = (0,0)
    x12    [0,1]   value at (0,1)
    x21    [1,0]   value at (1,0)
    x22    [1,1]   value at (1,1)
    x13    [0,2]   d/dv at (0,0)       x14  [0,3]  d/dv at (0,1)
    x23    [1,2]   d/dv at (1,0)       x24  [1,3]  d/dv at (1,1)
    x31    [2,0]   d/du at (0,0)       x32  [2,1]  d/du at (0,1)
    x41    [3,0]   d/du at (1,0)       x42  [3,1]  d/du at (1,1)
    x33    [2,2]   twist at (0,0)      x34  [2,3]  twist at (0,1)
    x43    [3,2]   twist at (1,0)      x44  [3,3]  twist at (1,1)

Rows 3-4 hold u-derivatives and columns 3-4 hold v-derivatives.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Literal, NamedTuple, Sequence

import numpy as np

from .algebra import Matrix, Mode, ModeError, ShapeError, infer_mode

__all__ = [
    "EDGES",
    "DegenerateNormalError",
    "Evaluation",
    "HermiteCurve",
    "Patch3",
    "boundary_curve",
    "curve_eval",
    "geometry_matrix",
    "hermite_matrix",
    "patch_eval",
    "patch_normal",
    "patch_partials",
]

Edge = Literal["u0", "u1", "v0", "v1"]
EDGES: tuple[Edge, ...] = ("u0", "u1", "v0", "v1")

_MH_ROWS = ((2, -3, 0, 1), (-2, 3, 0, 0), (1, -2, 1, 0), (1, -1, 0, 0))
_MH = np.array(_MH_ROWS, dtype=float)


class DegenerateNormalError(ValueError):
    def __init__(self, u: float, v: float, magnitude: float):
        super().__init__(f"degenerate normal at (u, v) = ({u}, {v}): |du x dv| = {magnitude:.3g}")
        self.u = u
        self.v = v
        self.magnitude = magnitude


class Evaluation(NamedTuple):
    point: np.ndarray
    extrapolated: bool


@lru_cache(maxsize=None)
def hermite_matrix(mode: Mode = Mode.EXACT) -> Matrix:
    return Matrix.from_rows(_MH_ROWS, mode)


def geometry_matrix(rows: Sequence[Sequence], mode: Mode | None = None) -> Matrix:
    """A 4x4 control matrix for one coordinate."""
    m = Matrix.from_rows(rows, mode)
    if (m.rows, m.cols) != (4, 4):
        raise ShapeError(f"geometry matrix must be 4x4, got {m.rows}x{m.cols}")
    return m


def _basis(t: float) -> np.ndarray:
    return _MH @ np.array([t**3, t**2, t, 1.0])


def _dbasis(t: float) -> np.ndarray:
    return _MH @ np.array([3.0 * t**2, 2.0 * t, 1.0, 0.0])


def _outside(*ts: float) -> bool:
    return any(t < 0.0 or t > 1.0 for t in ts)


@dataclass(frozen=True)
class HermiteCurve:
    """Per-coordinate control vectors ``[p0, p1, m0, m1]``."""

    x: tuple
    y: tuple
    z: tuple

    @cached_property
    def array(self) -> np.ndarray:
        return np.array([[float(v) for v in c] for c in (self.x, self.y, self.z)])


def curve_eval(c: HermiteCurve, t: float) -> Evaluation:
    return Evaluation(c.array @ _basis(t), _outside(t))


@dataclass(frozen=True)
class Patch3:
    x: Matrix
    y: Matrix
    z: Matrix

    def __post_init__(self):
        for m in (self.x, self.y, self.z):
            if (m.rows, m.cols) != (4, 4):
                raise ShapeError("patch coordinates must be 4x4 geometry matrices")
        if not (self.x.mode is self.y.mode is self.z.mode):
            raise ModeError("patch coordinates must share one numeric mode")

    @classmethod
    def from_arrays(cls, data, mode: Mode | None = None) -> "Patch3":
        """Build from a (3, 4, 4) nested sequence of control values."""
        if mode is None:
            flat = [v for g in data for r in g for v in r]
            mode = infer_mode(flat)
        return cls(*(geometry_matrix(g, mode) for g in data))

    @property
    def mode(self) -> Mode:
        return self.x.mode

    @property
    def coords(self) -> tuple[Matrix, Matrix, Matrix]:
        return (self.x, self.y, self.z)

    @cached_property
    def array(self) -> np.ndarray:
        """Control values as a float (3, 4, 4) array."""
        return np.stack([m.to_numpy() for m in self.coords])

    def with_mode(self, mode: Mode) -> "Patch3":
        return Patch3(*(m.with_mode(mode) for m in self.coords))

    def corners(self) -> np.ndarray:
        """Corner points in the order x11, x12, x21, x22."""
        a = self.array
        return np.array([a[:, 0, 0], a[:, 0, 1], a[:, 1, 0], a[:, 1, 1]])

    def scale(self) -> float:
        return max(1.0, float(np.abs(self.array).max()))


def patch_eval(p: Patch3, u: float, v: float) -> Evaluation:
    bu, bv = _basis(u), _basis(v)
    point = np.array([bu @ g @ bv for g in p.array])
    return Evaluation(point, _outside(u, v))


def patch_partials(p: Patch3, u: float, v: float) -> tuple[np.ndarray, np.ndarray]:
    bu, bv = _basis(u), _basis(v)
    du_b, dv_b = _dbasis(u), _dbasis(v)
    du = np.array([du_b @ g @ bv for g in p.array])
    dv = np.array([bu @ g @ dv_b for g in p.array])
    return du, dv


def _degenerate_eps(p: Patch3) -> float:
    c = p.corners()
    diag = float(np.linalg.norm(c.max(axis=0) - c.min(axis=0)))
    return 1e-12 * diag**2


def patch_normal(p: Patch3, u: float, v: float) -> np.ndarray:
    du, dv = patch_partials(p, u, v)
    n = np.cross(du, dv)
    mag = float(np.linalg.norm(n))
    if mag <= _degenerate_eps(p):
        raise DegenerateNormalError(u, v, mag)
    return n / mag


def boundary_curve(p: Patch3, edge: Edge) -> HermiteCurve:
    """The Hermite curve traced by the patch along one of its four edges.

    ``u0``/``u1`` fix u and run along v; ``v0``/``v1`` fix v and run along u.
    """
    if edge == "u0":
        pick = lambda m: m.row(0)
    elif edge == "u1":
        pick = lambda m: m.row(1)
    elif edge == "v0":
        pick = lambda m: m.col(0)
    elif edge == "v1":
        pick = lambda m: m.col(1)
    else:
        raise ValueError(f"unknown edge {edge!r}; expected one of {EDGES}")
    return HermiteCurve(*(tuple(pick(m)) for m in p.coords))
