"""OBJ and ASCII PLY writers for triangle meshes."""

from __future__ import annotations

from pathlib import Path
from typing import TextIO

from .tessellation import TriangleMesh


def _fmt(x: float) -> str:
    # 17 significant digits round-trip every binary64; +0.0 folds away "-0".
    return format(float(x) + 0.0, ".17g")


def export_obj(m: TriangleMesh, writer: TextIO) -> None:
    m.validate()
    for v in m.vertices:
        writer.write("v {} {} {}\n".format(*map(_fmt, v)))
    for n in m.normals:
        writer.write("vn {} {} {}\n".format(*map(_fmt, n)))
    for a, b, c in m.triangles + 1:
        writer.write(f"f {a}//{a} {b}//{b} {c}//{c}\n")


def export_ply(m: TriangleMesh, writer: TextIO) -> None:
    m.validate()
    writer.write(
        "ply\n"
        "format ascii 1.0\n"
        f"element vertex {m.n_vertices}\n"
        "property double x\nproperty double y\nproperty double z\n"
        "property double nx\nproperty double ny\nproperty double nz\n"
        f"element face {m.n_triangles}\n"
        "property list uchar int vertex_indices\n"
        "end_header\n"
    )
    for v, n in zip(m.vertices, m.normals):
        writer.write(" ".join(_fmt(x) for x in (*v, *n)) + "\n")
    for a, b, c in m.triangles:
        writer.write(f"3 {a} {b} {c}\n")


def write_mesh(m: TriangleMesh, path: str | Path) -> None:
    """Write OBJ or PLY, chosen by file extension."""
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".obj":
        exporter = export_obj
    elif suffix == ".ply":
        exporter = export_ply
    else:
        raise ValueError(f"unsupported mesh format {suffix!r}; use .obj or .ply")
    with path.open("w", encoding="ascii", newline="\n") as fh:
        exporter(m, fh)
