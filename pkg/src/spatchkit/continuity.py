"""Joining S-Patches along edges and measuring C0 / tangent-plane continuity."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .algebra import Mode
from .hermite import EDGES, DegenerateNormalError, Edge, patch_eval, patch_normal
from .spatch import (
    TANGENT_LABELS,
    SPatch,
    boundary_values,
    construct_spatch,
    project_tangents,
    spatch_from_coords,
    split,
)

ANGLE_TOL = 1e-9

# Corners of each edge in order of increasing edge parameter, and the
# derivative direction that runs along the edge.
_EDGE_CORNERS = {
    "u0": ((0, 0), (0, 1)),
    "u1": ((1, 0), (1, 1)),
    "v0": ((0, 0), (1, 0)),
    "v1": ((0, 1), (1, 1)),
}
_EDGE_ALONG = {"u0": "v", "u1": "v", "v0": "u", "v1": "u"}
_CORNER_ORDER = ((0, 0), (0, 1), (1, 0), (1, 1))


def edge_param(edge: Edge, t: float) -> tuple[float, float]:
    if edge == "u0":
        return 0.0, t
    if edge == "u1":
        return 1.0, t
    if edge == "v0":
        return t, 0.0
    if edge == "v1":
        return t, 1.0
    raise ValueError(f"unknown edge {edge!r}")


def _tangent_slot(corner: tuple[int, int], direction: str) -> int:
    i, j = corner
    label = f"x{3 + i}{1 + j}" if direction == "u" else f"x{1 + i}{3 + j}"
    return TANGENT_LABELS.index(label)


def _other(direction: str) -> str:
    return "v" if direction == "u" else "u"


@dataclass(frozen=True)
class Adjacency:
    a: int
    edge_a: Edge
    b: int
    edge_b: Edge
    reversed: bool = False

    def swapped(self) -> "Adjacency":
        return Adjacency(self.b, self.edge_b, self.a, self.edge_a, self.reversed)


@dataclass(frozen=True)
class PatchComplex:
    patches: tuple
    adjacencies: tuple = ()
    ids: tuple = ()

    def __post_init__(self):
        if not self.ids:
            object.__setattr__(self, "ids", tuple(str(k) for k in range(len(self.patches))))
        for adj in self.adjacencies:
            for idx, edge in ((adj.a, adj.edge_a), (adj.b, adj.edge_b)):
                if not 0 <= idx < len(self.patches):
                    raise ValueError(f"adjacency references missing patch {idx}")
                if edge not in EDGES:
                    raise ValueError(f"adjacency references unknown edge {edge!r}")


def join_edge(
    a: SPatch,
    edge_a: Edge,
    corners,
    tangents_u,
    tangents_v,
    edge_b: Edge,
    reversed: bool = False,
) -> SPatch:
    """Construct patch b so that its ``edge_b`` coincides with ``a``'s ``edge_a``.

    Positions and along-edge tangents on the shared edge are copied from ``a``;
    cross-edge tangents at the shared corners come from the caller.  Those four
    tangent slots are pinned and the compatibility residual is spread over the
    other four slots only.
    """
    mode = a.patch.mode
    _, cs, ts = boundary_values(corners, tangents_u, tangents_v, mode)
    cs = [list(c) for c in cs]
    ts = [list(t) for t in ts]

    ends_a = _EDGE_CORNERS[edge_a]
    if reversed:
        ends_a = ends_a[::-1]
    ends_b = _EDGE_CORNERS[edge_b]
    dir_a, dir_b = _EDGE_ALONG[edge_a], _EDGE_ALONG[edge_b]
    sign = -1 if reversed else 1

    pinned = set()
    for ca, cb in zip(ends_a, ends_b):
        for c in range(3):
            a_corners, a_tangents, _ = split(a.patch.coords[c])
            cs[c][_CORNER_ORDER.index(cb)] = a_corners[_CORNER_ORDER.index(ca)]
            ts[c][_tangent_slot(cb, dir_b)] = sign * a_tangents[_tangent_slot(ca, dir_a)]
        pinned.add(_tangent_slot(cb, dir_b))
        pinned.add(_tangent_slot(cb, _other(dir_b)))
    free = [k for k in range(8) if k not in pinned]
    # Every compatibility coefficient is +-1, so four free slots always suffice.
    assert len(free) == 4

    coords = [(tuple(cs[c]), project_tangents(cs[c], ts[c], free)) for c in range(3)]
    for c in range(3):
        for k in pinned:
            assert coords[c][1][k] == ts[c][k], "pinned tangent slot moved"
    return spatch_from_coords(coords)


@dataclass(frozen=True)
class EdgeReport:
    adjacency: Adjacency
    max_gap: float
    max_angle: float
    samples: int
    degenerate_samples: int


@dataclass(frozen=True)
class VertexReport:
    position: tuple
    incident: tuple  # (patch index, (i, j) corner)
    pairwise_angles: dict  # (patch index, patch index) -> radians
    flagged: bool

    @property
    def valence(self) -> int:
        return len({p for p, _ in self.incident})


@dataclass(frozen=True)
class ContinuityReport:
    edges: tuple
    vertices: tuple
    scale: float

    @property
    def max_gap(self) -> float:
        return max((e.max_gap for e in self.edges), default=0.0)

    def to_dict(self, ids: Sequence[str] | None = None) -> dict:
        name = (lambda k: ids[k]) if ids else str
        return {
            "scale": self.scale,
            "edges": [
                {
                    "a": name(e.adjacency.a),
                    "edge_a": e.adjacency.edge_a,
                    "b": name(e.adjacency.b),
                    "edge_b": e.adjacency.edge_b,
                    "orientation": "reversed" if e.adjacency.reversed else "same",
                    "max_gap": e.max_gap,
                    "max_normal_angle": e.max_angle,
                    "samples": e.samples,
                    "degenerate_samples": e.degenerate_samples,
                }
                for e in self.edges
            ],
            "shared_vertices": [
                {
                    "position": list(v.position),
                    "patches": [name(p) for p, _ in v.incident],
                    "valence": v.valence,
                    "pairwise_normal_angles": [
                        {"a": name(i), "b": name(j), "angle": ang}
                        for (i, j), ang in v.pairwise_angles.items()
                    ],
                    "flagged": v.flagged,
                }
                for v in self.vertices
            ],
        }


def _normal_angle(n1: np.ndarray, n2: np.ndarray) -> float:
    # Folded to [0, pi/2] so opposite parametrization winding is ignored.
    return float(math.acos(min(1.0, abs(float(n1 @ n2)))))


def _safe_normal(patch, u, v):
    try:
        return patch_normal(patch, u, v)
    except DegenerateNormalError:
        return None


def check_continuity(c: PatchComplex, samples: int = 33) -> ContinuityReport:
    if samples < 2:
        raise ValueError("need at least two samples per edge")
    patches = [s.patch for s in c.patches]
    scale = max((p.scale() for p in patches), default=1.0)

    edges = []
    for adj in c.adjacencies:
        pa, pb = patches[adj.a], patches[adj.b]
        gap = angle = 0.0
        degenerate = 0
        for k in range(samples):
            t = k / (samples - 1)
            ua = edge_param(adj.edge_a, t)
            ub = edge_param(adj.edge_b, 1.0 - t if adj.reversed else t)
            gap = max(gap, float(np.linalg.norm(patch_eval(pa, *ua).point - patch_eval(pb, *ub).point)))
            na, nb = _safe_normal(pa, *ua), _safe_normal(pb, *ub)
            if na is None or nb is None:
                degenerate += 1
                continue
            angle = max(angle, _normal_angle(na, nb))
        edges.append(EdgeReport(adj, gap, angle, samples, degenerate))

    return ContinuityReport(tuple(edges), tuple(_shared_vertices(patches, scale)), scale)


def _shared_vertices(patches, scale: float) -> list[VertexReport]:
    tol = 1e-9 * scale
    clusters: list[tuple[np.ndarray, list]] = []
    for k, p in enumerate(patches):
        for corner in _CORNER_ORDER:
            pt = patch_eval(p, float(corner[0]), float(corner[1])).point
            for anchor, members in clusters:
                if np.linalg.norm(anchor - pt) <= tol:
                    members.append((k, corner))
                    break
            else:
                clusters.append((pt, [(k, corner)]))

    out = []
    for anchor, members in clusters:
        if len({k for k, _ in members}) < 2:
            continue
        normals = {}
        for k, corner in members:
            normals.setdefault(k, _safe_normal(patches[k], float(corner[0]), float(corner[1])))
        angles = {}
        for i, j in itertools.combinations(sorted(normals), 2):
            if normals[i] is not None and normals[j] is not None:
                angles[(i, j)] = _normal_angle(normals[i], normals[j])
            else:
                angles[(i, j)] = math.nan
        valence = len(normals)
        flagged = valence >= 3 and any(a > ANGLE_TOL or math.isnan(a) for a in angles.values())
        out.append(VertexReport(tuple(float(v) for v in anchor), tuple(members), angles, flagged))
    return out


# -- demos -------------------------------------------------------------------

# Three outward-facing unit-square faces of the cube [0,1]^3 meeting at the origin.
# Each entry: id, corners at (u,v) = (0,0),(0,1),(1,0),(1,1), d/du, d/dv.
HALF_CUBE_FACES = (
    (
        "bottom",  # (u, v) -> (v, u, 0)
        ((0, 0, 0), (1, 0, 0), (0, 1, 0), (1, 1, 0)),
        ((0, 1, 0),) * 4,
        ((1, 0, 0),) * 4,
    ),
    (
        "side_x0",  # (u, v) -> (0, v, u)
        ((0, 0, 0), (0, 1, 0), (0, 0, 1), (0, 1, 1)),
        ((0, 0, 1),) * 4,
        ((0, 1, 0),) * 4,
    ),
    (
        "side_y0",  # (u, v) -> (u, 0, v)
        ((0, 0, 0), (0, 0, 1), (1, 0, 0), (1, 0, 1)),
        ((1, 0, 0),) * 4,
        ((0, 0, 1),) * 4,
    ),
)
HALF_CUBE_ADJACENCIES = (
    Adjacency(0, "v0", 1, "u0"),
    Adjacency(0, "u0", 2, "v0"),
    Adjacency(1, "v0", 2, "u0"),
)


def half_cube_demo() -> PatchComplex:
    patches = tuple(
        construct_spatch(corners, tu, tv, policy="project", mode=Mode.EXACT)
        for _, corners, tu, tv in HALF_CUBE_FACES
    )
    return PatchComplex(patches, HALF_CUBE_ADJACENCIES, tuple(f[0] for f in HALF_CUBE_FACES))


def joined_pair_demo() -> PatchComplex:
    """Two curved patches side by side, the second joined onto the first's u1 edge."""
    a = construct_spatch(
        corners=((0, 0, 0), (0, 1, 0.2), (1, 0, 0.3), (1, 1, 0.1)),
        tangents_u=((1, 0, 0.4), (1, 0, 0.1), (1, 0, -0.2), (1, 0, 0.3)),
        tangents_v=((0, 1, 0.5), (0, 1, -0.1), (0, 1, 0.2), (0, 1, -0.3)),
        policy="project",
    )
    a_u = [tuple(float(g[3, j]) for g in a.patch.coords) for j in (0, 1)]
    b = join_edge(
        a,
        "u1",
        corners=((1, 0, 0), (1, 1, 0), (2, 0, 0.2), (2, 1, 0.4)),
        tangents_u=(a_u[0], a_u[1], (1, 0, 0.1), (1, 0, -0.1)),
        tangents_v=((0, 1, 0), (0, 1, 0), (0, 1, 0.3), (0, 1, 0.2)),
        edge_b="u0",
    )
    return PatchComplex((a, b), (Adjacency(0, "u1", 1, "u0"),), ("left", "right"))
