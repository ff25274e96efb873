"""Uniform triangulation of the u-v domain and diagonal sampling."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .hermite import DegenerateNormalError, Patch3, patch_eval, patch_normal
from .spatch import DiagonalKind

__all__ = [
    "TessellationPattern",
    "TriangleMesh",
    "cubic_fit_residual",
    "diagonal_polyline",
    "merge_meshes",
    "pattern_equivalence_report",
    "tessellate",
]

FALLBACK_NORMAL = np.array([0.0, 0.0, 1.0])


class TessellationPattern(enum.Enum):
    DIAG_MAIN = "main"
    DIAG_ANTI = "anti"
    ALTERNATING = "alt"


@dataclass(frozen=True)
class TriangleMesh:
    vertices: np.ndarray  # (N, 3)
    normals: np.ndarray  # (N, 3)
    triangles: np.ndarray  # (M, 3) int
    patch_ids: np.ndarray  # (N,)
    params: np.ndarray  # (N, 2) provenance (u, v)
    degenerate_normals: np.ndarray = field(default=None)  # (N,) bool

    def __post_init__(self):
        if self.degenerate_normals is None:
            object.__setattr__(self, "degenerate_normals", np.zeros(len(self.vertices), dtype=bool))

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    def validate(self) -> None:
        t = self.triangles
        if t.size and (t.min() < 0 or t.max() >= self.n_vertices):
            raise ValueError("triangle index out of range")
        if np.any((t[:, 0] == t[:, 1]) | (t[:, 1] == t[:, 2]) | (t[:, 0] == t[:, 2])):
            raise ValueError("degenerate triangle with repeated index")

    def face_normals(self) -> np.ndarray:
        v = self.vertices
        t = self.triangles
        return np.cross(v[t[:, 1]] - v[t[:, 0]], v[t[:, 2]] - v[t[:, 0]])


def _cell_uses_main(pattern: TessellationPattern, i: int, j: int) -> bool:
    if pattern is TessellationPattern.DIAG_MAIN:
        return True
    if pattern is TessellationPattern.DIAG_ANTI:
        return False
    return (i + j) % 2 == 0


def grid_triangles(n: int, pattern: TessellationPattern) -> np.ndarray:
    """Index buffer for an (n+1)^2 grid; vertex (i, j) sits at index i*(n+1)+j."""
    tris = []
    w = n + 1
    for i in range(n):
        for j in range(n):
            a = i * w + j  # (u, v)
            b = (i + 1) * w + j  # (u + h, v)
            c = (i + 1) * w + j + 1  # (u + h, v + h)
            d = i * w + j + 1  # (u, v + h)
            # Counter-clockwise in (u, v) so faces follow du x dv.
            if _cell_uses_main(pattern, i, j):
                tris += [(a, b, c), (a, c, d)]
            else:
                tris += [(a, b, d), (b, c, d)]
    return np.array(tris, dtype=np.int64).reshape(-1, 3)


def tessellate(
    p: Patch3, n: int, pattern: TessellationPattern = TessellationPattern.DIAG_MAIN, patch_id: int = 0
) -> TriangleMesh:
    if n < 1:
        raise ValueError("need at least one cell per side")
    w = n + 1
    params = np.array([(i / n, j / n) for i in range(w) for j in range(w)])
    vertices = np.array([patch_eval(p, u, v).point for u, v in params])

    normals = np.empty_like(vertices)
    bad = np.zeros(len(vertices), dtype=bool)
    for k, (u, v) in enumerate(params):
        try:
            normals[k] = patch_normal(p, u, v)
        except DegenerateNormalError:
            bad[k] = True
    for k in np.flatnonzero(bad):
        i, j = divmod(int(k), w)
        neigh = [
            (i + di) * w + (j + dj)
            for di in (-1, 0, 1)
            for dj in (-1, 0, 1)
            if (di or dj) and 0 <= i + di < w and 0 <= j + dj < w
        ]
        good = [normals[m] for m in neigh if not bad[m]]
        avg = np.sum(good, axis=0) if good else np.zeros(3)
        norm = np.linalg.norm(avg)
        normals[k] = avg / norm if norm > 0 else FALLBACK_NORMAL

    return TriangleMesh(
        vertices=vertices,
        normals=normals,
        triangles=grid_triangles(n, pattern),
        patch_ids=np.full(len(vertices), patch_id, dtype=np.int64),
        params=params,
        degenerate_normals=bad,
    )


def merge_meshes(meshes: Sequence[TriangleMesh]) -> TriangleMesh:
    """Concatenate meshes in order; shared boundary vertices are not welded."""
    offsets = np.cumsum([0] + [m.n_vertices for m in meshes[:-1]])
    return TriangleMesh(
        vertices=np.concatenate([m.vertices for m in meshes]),
        normals=np.concatenate([m.normals for m in meshes]),
        triangles=np.concatenate([m.triangles + off for m, off in zip(meshes, offsets)]),
        patch_ids=np.concatenate([m.patch_ids for m in meshes]),
        params=np.concatenate([m.params for m in meshes]),
        degenerate_normals=np.concatenate([m.degenerate_normals for m in meshes]),
    )


def _diagonal_param(d: DiagonalKind, t: float) -> tuple[float, float]:
    return (t, t) if d is DiagonalKind.MAIN else (t, 1.0 - t)


def diagonal_polyline(p: Patch3, d: DiagonalKind, n: int) -> np.ndarray:
    """Points along v = u (MAIN) or v = 1 - u (ANTI) at n + 1 uniform u values."""
    if n < 1:
        raise ValueError("need n >= 1")
    return np.array([patch_eval(p, *_diagonal_param(d, k / n)).point for k in range(n + 1)])


def cubic_fit_residual(t: np.ndarray, samples: np.ndarray) -> np.ndarray:
    """Max absolute residual of a per-coordinate least-squares cubic fit."""
    t = np.asarray(t, dtype=float)
    samples = np.asarray(samples, dtype=float).reshape(len(t), -1)
    # Shifted basis keeps the Vandermonde matrix well conditioned on [0, 1].
    s = 2.0 * t - 1.0
    vander = np.vander(s, 4)
    coef, *_ = np.linalg.lstsq(vander, samples, rcond=None)
    return np.abs(vander @ coef - samples).max(axis=0)


def diagonal_cubic_residuals(p: Patch3, n: int = 32) -> dict:
    t = np.linspace(0.0, 1.0, n + 1)
    return {d: cubic_fit_residual(t, diagonal_polyline(p, d, n)) for d in DiagonalKind}


@dataclass(frozen=True)
class PatternReport:
    vertex_deviation: dict  # pattern -> max |vertex - surface|
    midpoint_deviation: dict  # pattern -> max deviation of cell-diagonal edge midpoints
    diagonal_residuals: dict  # DiagonalKind -> per-coordinate cubic-fit residual
    scale: float


def pattern_equivalence_report(p: Patch3, n: int, diagonal_samples: int = 32) -> PatternReport:
    vdev, mdev = {}, {}
    w = n + 1
    for pattern in TessellationPattern:
        mesh = tessellate(p, n, pattern)
        surf = np.array([patch_eval(p, u, v).point for u, v in mesh.params])
        vdev[pattern] = float(np.abs(mesh.vertices - surf).max())
        worst = 0.0
        for i in range(n):
            for j in range(n):
                if _cell_uses_main(pattern, i, j):
                    e0, e1 = i * w + j, (i + 1) * w + j + 1
                else:
                    e0, e1 = (i + 1) * w + j, i * w + j + 1
                mid = 0.5 * (mesh.vertices[e0] + mesh.vertices[e1])
                uv = 0.5 * (mesh.params[e0] + mesh.params[e1])
                worst = max(worst, float(np.linalg.norm(mid - patch_eval(p, *uv).point)))
        mdev[pattern] = worst
    return PatternReport(vdev, mdev, diagonal_cubic_residuals(p, diagonal_samples), p.scale())
