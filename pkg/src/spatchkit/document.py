"""JSON patch documents.

A document lists patches by their boundary data only; twists are always
derived.  Example (a flat unit square, ``x = u``, ``y = v``)::

    {
      "version": 1,
      "patches": [
        {
          "id": "square",
          "corners":    [[0, 0, 0], [0, 1, 0], [1, 0, 0], [1, 1, 0]],
          "tangents_u": [[1, 0, 0], [1, 0, 0], [1, 0, 0], [1, 0, 0]],
          "tangents_v": [[0, 1, 0], [0, 1, 0], [0, 1, 0], [0, 1, 0]],
          "policy": "strict"
        }
      ],
      "adjacencies": []
    }

Corners and both tangent arrays are ordered by (u, v) = (0,0), (0,1), (1,0),
(1,1).  ``tangents_u`` holds d/du (x31, x32, x41, x42), ``tangents_v`` holds
d/dv (x13, x14, x23, x24).  Numbers may be JSON ints or floats, or strings
``"p/q"`` for exact rationals.  A patch whose numbers are all ints/rationals
is built in exact arithmetic.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

from .continuity import HALF_CUBE_ADJACENCIES, HALF_CUBE_FACES, Adjacency, PatchComplex
from .hermite import EDGES
from .spatch import SPatch, construct_spatch

FORMAT_VERSION = 1

_DOC_KEYS = {"version", "patches", "adjacencies"}
_PATCH_KEYS = {"id", "corners", "tangents_u", "tangents_v", "policy"}
_ADJ_KEYS = {"a", "edge_a", "b", "edge_b", "orientation"}


class DocumentError(ValueError):
    def __init__(self, message: str, path: str = "", line: int | None = None):
        self.message = message
        self.path = path
        self.line = line
        where = ""
        if path:
            where += f" at {path}"
        if line is not None:
            where += f" (line {line})"
        super().__init__(message + where)


@dataclass(frozen=True)
class PatchSpec:
    id: str
    corners: tuple
    tangents_u: tuple
    tangents_v: tuple
    policy: str = "strict"


@dataclass(frozen=True)
class AdjacencySpec:
    a: str
    edge_a: str
    b: str
    edge_b: str
    orientation: str = "same"


@dataclass(frozen=True)
class PatchDocument:
    version: int
    patches: tuple
    adjacencies: tuple = ()
    warnings: tuple = field(default=(), compare=False)

    def patch(self, pid: str) -> PatchSpec:
        for p in self.patches:
            if p.id == pid:
                return p
        raise KeyError(pid)


def _line_of(text: str, needle: str) -> int | None:
    pos = text.find(needle)
    return None if pos < 0 else text.count("\n", 0, pos) + 1


def _number(value, path: str):
    if isinstance(value, bool):
        raise DocumentError("expected a number, got a boolean", path)
    if isinstance(value, (int, float)):
        return value
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError):
            pass
    raise DocumentError(f"expected a number or 'p/q' string, got {value!r}", path)


def _points(value, path: str) -> tuple:
    if not isinstance(value, list) or len(value) != 4:
        n = len(value) if isinstance(value, list) else type(value).__name__
        raise DocumentError(f"expected 4 points, got {n}", path)
    out = []
    for k, pt in enumerate(value):
        if not isinstance(pt, list) or len(pt) != 3:
            raise DocumentError("expected a 3-vector", f"{path}[{k}]")
        out.append(tuple(_number(v, f"{path}[{k}]") for v in pt))
    return tuple(out)


def _check_keys(obj: dict, allowed: set, path: str, strict: bool, notes: list, line=None):
    extra = sorted(set(obj) - allowed)
    if not extra:
        return
    msg = f"unknown field(s) {', '.join(extra)}"
    if strict:
        raise DocumentError(msg, path, line)
    notes.append(f"{msg} at {path or 'document'}")
    warnings.warn(f"{msg} at {path or 'document'}", stacklevel=3)


def parse_document(text: str, strict: bool = True) -> PatchDocument:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"invalid JSON: {exc.msg}", f"column {exc.colno}", exc.lineno) from None
    if not isinstance(raw, dict):
        raise DocumentError("document must be a JSON object")
    notes: list[str] = []
    _check_keys(raw, _DOC_KEYS, "", strict, notes)

    if "version" not in raw:
        raise DocumentError("missing mandatory field 'version'")
    if raw["version"] != FORMAT_VERSION:
        raise DocumentError(f"unsupported version {raw['version']!r}, expected {FORMAT_VERSION}", "version")

    patches_raw = raw.get("patches")
    if not isinstance(patches_raw, list):
        raise DocumentError("'patches' must be a list", "patches")
    patches = []
    seen = set()
    for k, p in enumerate(patches_raw):
        if not isinstance(p, dict):
            raise DocumentError("patch must be an object", f"patches[{k}]")
        pid = p.get("id", str(k))
        if not isinstance(pid, str):
            raise DocumentError("patch id must be a string", f"patches[{k}].id")
        line = _line_of(text, json.dumps(pid))
        path = f"patches[{k}] (id {pid!r})"
        if pid in seen:
            raise DocumentError("duplicate patch id", path, line)
        seen.add(pid)
        _check_keys(p, _PATCH_KEYS, path, strict, notes, line)
        for key in ("corners", "tangents_u", "tangents_v"):
            if key not in p:
                raise DocumentError(f"missing '{key}'", path, line)
        try:
            corners = _points(p["corners"], f"{path}.corners")
            tu = _points(p["tangents_u"], f"{path}.tangents_u")
            tv = _points(p["tangents_v"], f"{path}.tangents_v")
        except DocumentError as exc:
            raise DocumentError(exc.message, exc.path, line) from None
        policy = p.get("policy", "strict")
        if policy not in ("strict", "project"):
            raise DocumentError(f"policy must be 'strict' or 'project', got {policy!r}", f"{path}.policy", line)
        patches.append(PatchSpec(pid, corners, tu, tv, policy))

    adjacencies = []
    for k, adj in enumerate(raw.get("adjacencies", [])):
        path = f"adjacencies[{k}]"
        if not isinstance(adj, dict):
            raise DocumentError("adjacency must be an object", path)
        _check_keys(adj, _ADJ_KEYS, path, strict, notes)
        for key in ("a", "edge_a", "b", "edge_b"):
            if key not in adj:
                raise DocumentError(f"missing '{key}'", path)
        for key in ("a", "b"):
            if adj[key] not in seen:
                raise DocumentError(f"unknown patch id {adj[key]!r}", f"{path}.{key}")
        for key in ("edge_a", "edge_b"):
            if adj[key] not in EDGES:
                raise DocumentError(f"edge must be one of {', '.join(EDGES)}", f"{path}.{key}")
        orientation = adj.get("orientation", "same")
        if orientation not in ("same", "reversed"):
            raise DocumentError("orientation must be 'same' or 'reversed'", f"{path}.orientation")
        adjacencies.append(AdjacencySpec(adj["a"], adj["edge_a"], adj["b"], adj["edge_b"], orientation))

    return PatchDocument(FORMAT_VERSION, tuple(patches), tuple(adjacencies), tuple(notes))


def _json_number(v):
    if isinstance(v, Fraction):
        return v.numerator if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    return v


def document_to_dict(doc: PatchDocument) -> dict:
    pts = lambda arr: [[_json_number(v) for v in pt] for pt in arr]
    return {
        "version": doc.version,
        "patches": [
            {
                "id": p.id,
                "corners": pts(p.corners),
                "tangents_u": pts(p.tangents_u),
                "tangents_v": pts(p.tangents_v),
                "policy": p.policy,
            }
            for p in doc.patches
        ],
        "adjacencies": [
            {"a": a.a, "edge_a": a.edge_a, "b": a.b, "edge_b": a.edge_b, "orientation": a.orientation}
            for a in doc.adjacencies
        ],
    }


def serialize_document(doc: PatchDocument) -> str:
    # json.dumps writes floats with repr(), the shortest round-tripping decimal.
    return json.dumps(document_to_dict(doc), indent=2) + "\n"


def build_patch(spec: PatchSpec) -> SPatch:
    return construct_spatch(spec.corners, spec.tangents_u, spec.tangents_v, policy=spec.policy)


def build_complex(doc: PatchDocument) -> PatchComplex:
    index = {p.id: k for k, p in enumerate(doc.patches)}
    patches = tuple(build_patch(p) for p in doc.patches)
    adjs = tuple(
        Adjacency(index[a.a], a.edge_a, index[a.b], a.edge_b, a.orientation == "reversed")
        for a in doc.adjacencies
    )
    return PatchComplex(patches, adjs, tuple(index))


def half_cube_document() -> PatchDocument:
    ids = [f[0] for f in HALF_CUBE_FACES]
    patches = tuple(PatchSpec(pid, c, tu, tv, "project") for pid, c, tu, tv in HALF_CUBE_FACES)
    adjs = tuple(
        AdjacencySpec(ids[a.a], a.edge_a, ids[a.b], a.edge_b, "reversed" if a.reversed else "same")
        for a in HALF_CUBE_ADJACENCIES
    )
    return PatchDocument(FORMAT_VERSION, patches, adjs)
