"""Command-line interface: ``spatch <command> ...``.

Human-readable output goes to stdout.  Failures print one JSON line to
stderr (``{"error": kind, "message": ...}``) and exit nonzero.  Set
``SPATCH_LOG_LEVEL`` (e.g. ``INFO``) for diagnostics on stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from .continuity import check_continuity
from .document import (
    DocumentError,
    PatchDocument,
    build_complex,
    build_patch,
    half_cube_document,
    parse_document,
    serialize_document,
)
from .mesh_io import write_mesh
from .spatch import (
    COORDS,
    LAMBDA_PRINTED,
    DerivationError,
    DiagonalKind,
    IncompatibleTangentsError,
    SPatchReport,
    boundary_values,
    build_constraint_system,
    check_spatch,
    compatibility_residual,
    diagonal_coeffs,
    hermite_patch,
)
from .tessellation import TessellationPattern, diagonal_cubic_residuals, merge_meshes, tessellate

log = logging.getLogger("spatchkit")

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_ERROR = 2

PATTERNS = {"main": TessellationPattern.DIAG_MAIN, "anti": TessellationPattern.DIAG_ANTI, "alt": TessellationPattern.ALTERNATING}


class CliError(Exception):
    def __init__(self, kind: str, message: str):
        super().__init__(message)
        self.kind = kind


def _num(v) -> str:
    if isinstance(v, Fraction):
        return str(v)
    return repr(float(v))


def _load(path: str, lenient: bool = False) -> PatchDocument:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError("io", f"cannot read {path}: {exc.strerror}") from None
    try:
        return parse_document(text, strict=not lenient)
    except DocumentError as exc:
        raise CliError("document", str(exc)) from None


def _print_high(out, label: str, patch) -> SPatchReport:
    report = check_spatch(patch)
    for c in COORDS:
        for d in DiagonalKind:
            a6, a5, a4 = report.high_coeffs[c][d]
            print(f"  {label} {c} {d.value:<4} a6={_num(a6)} a5={_num(a5)} a4={_num(a4)}", file=out)
    return report


def cmd_check(args) -> int:
    doc = _load(args.document, args.lenient)
    out = sys.stdout
    all_ok = True
    for spec in doc.patches:
        mode, cs, ts = boundary_values(spec.corners, spec.tangents_u, spec.tangents_v)
        resid = [compatibility_residual(cs[c], ts[c]) for c in range(3)]
        print(f"patch {spec.id} ({mode.value}, policy {spec.policy})", file=out)
        print("  compatibility residual " + " ".join(f"{c}={_num(r)}" for c, r in zip(COORDS, resid)), file=out)
        try:
            sp = build_patch(spec)
        except IncompatibleTangentsError:
            all_ok = False
            print("  FAIL: boundary tangents are incompatible; zero-twist Hermite patch diagonals:", file=out)
            _print_high(out, "hermite", hermite_patch(spec.corners, spec.tangents_u, spec.tangents_v, mode=mode))
            continue
        report = _print_high(out, "spatch", sp.patch)
        for c, al, be in zip(COORDS, sp.alpha, sp.beta):
            ab = "undefined (phi = 0)" if al is None else f"alpha={_num(al)} beta={_num(be)}"
            print(f"  {c}: {ab}", file=out)
        status = "PASS" if report.passed else "FAIL"
        all_ok &= report.passed
        print(f"  {status}", file=out)
    return EXIT_OK if all_ok else EXIT_FAIL


def _build_all(doc: PatchDocument):
    try:
        return build_complex(doc)
    except IncompatibleTangentsError as exc:
        raise CliError("incompatible", str(exc)) from None


def cmd_build(args) -> int:
    doc = _load(args.document, args.lenient)
    if args.resolution < 1:
        raise CliError("usage", "--resolution must be >= 1")
    if Path(args.out).suffix.lower() not in (".obj", ".ply"):
        raise CliError("usage", "output must end in .obj or .ply")
    cx = _build_all(doc)
    meshes = [tessellate(s.patch, args.resolution, PATTERNS[args.pattern], k) for k, s in enumerate(cx.patches)]
    mesh = merge_meshes(meshes)
    write_mesh(mesh, args.out)
    print(f"wrote {args.out}: {mesh.n_vertices} vertices, {mesh.n_triangles} triangles")
    return EXIT_OK


def cmd_diag(args) -> int:
    doc = _load(args.document, args.lenient)
    try:
        spec = doc.patch(args.patch)
    except KeyError:
        raise CliError("usage", f"no patch with id {args.patch!r}") from None
    try:
        patch = build_patch(spec).patch
        kind = "spatch"
    except IncompatibleTangentsError:
        patch = hermite_patch(spec.corners, spec.tangents_u, spec.tangents_v)
        kind = "zero-twist hermite (boundary data incompatible)"
    print(f"patch {spec.id}: {kind}")
    for d in DiagonalKind:
        for c, g in zip(COORDS, patch.coords):
            a = diagonal_coeffs(g, d)
            print(f"  {d.value:<4} {c}: " + " ".join(f"a{k}={_num(a.coeff(k))}" for k in range(7)))
    resid = diagonal_cubic_residuals(patch, args.samples)
    for d in DiagonalKind:
        print(f"  cubic-fit residual {d.value:<4} " + " ".join(f"{c}={r:.3e}" for c, r in zip(COORDS, resid[d])))
    return EXIT_OK


def _report_text(report, ids) -> str:
    lines = []
    for e in report.edges:
        a = e.adjacency
        lines.append(
            f"edge {ids[a.a]}:{a.edge_a} ~ {ids[a.b]}:{a.edge_b}"
            f"{' (reversed)' if a.reversed else ''}: C0 gap {e.max_gap:.3e}, "
            f"normal angle {e.max_angle:.6f} rad ({e.samples} samples)"
        )
    for v in report.vertices:
        pos = ", ".join(f"{x:g}" for x in v.position)
        angles = ", ".join(f"{ids[i]}/{ids[j]}={ang:.6f}" for (i, j), ang in v.pairwise_angles.items())
        flag = "  <-- FLAGGED" if v.flagged else ""
        lines.append(f"vertex ({pos}) valence {v.valence}: {angles}{flag}")
    return "\n".join(lines)


def cmd_continuity(args) -> int:
    doc = _load(args.document, args.lenient)
    if args.samples < 2:
        raise CliError("usage", "--samples must be >= 2")
    cx = _build_all(doc)
    report = check_continuity(cx, args.samples)
    if args.json:
        print(json.dumps(report.to_dict(cx.ids), indent=2))
    else:
        print(_report_text(report, cx.ids))
    return EXIT_OK


def cmd_demo(args) -> int:
    if args.name != "half-cube":
        raise CliError("usage", f"unknown demo {args.name!r}")
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    doc = half_cube_document()
    (out_dir / "half_cube.json").write_text(serialize_document(doc), encoding="utf-8")
    cx = build_complex(doc)
    meshes = []
    for k, (pid, s) in enumerate(zip(cx.ids, cx.patches)):
        mesh = tessellate(s.patch, args.resolution, TessellationPattern.DIAG_MAIN, k)
        write_mesh(mesh, out_dir / f"half_cube_{pid}.obj")
        meshes.append(mesh)
    write_mesh(merge_meshes(meshes), out_dir / "half_cube.obj")
    report = check_continuity(cx, args.samples)
    (out_dir / "continuity.json").write_text(json.dumps(report.to_dict(cx.ids), indent=2) + "\n", encoding="utf-8")
    print(_report_text(report, cx.ids))
    print(f"wrote half-cube document, meshes and continuity report to {out_dir}")
    return EXIT_OK


def cmd_verify(args) -> int:
    try:
        cs = build_constraint_system()
    except DerivationError as exc:
        raise CliError("derivation", str(exc)) from None
    print("Lambda (rows: a6, a5, a4 for v=u; a6, a5, a4 for v=1-u):")
    print(cs.lam)
    print("Lambda1 (columns x11 x12 x21 x22):")
    print(cs.lambda1)
    print("Lambda2 (columns x13 x14 x23 x24 x31 x32 x33 x34 x41 x42 x43 x44):")
    print(cs.lambda2)
    print(f"rank(Lambda) = {cs.rank_lambda}")
    print(f"rank(Lambda2) = {cs.rank_lambda2}")
    golden = all(cs.lam[i, j] == v for i, row in enumerate(LAMBDA_PRINTED) for j, v in enumerate(row))
    print(f"Lambda matches reference table: {'yes' if golden else 'NO'}")
    by_table: dict[str, list] = {}
    for name, i, j, printed, derived in cs.omega_mismatches:
        by_table.setdefault(name, []).append(f"[{i},{j}] printed {printed} derived {derived}")
    for name in ("Omega1", "Omega2"):
        diffs = by_table.get(name, [])
        print(f"{name} vs reference table: {len(diffs)} differing entries (derived values used)")
        for line in diffs:
            print(f"  {line}")
    return EXIT_OK if golden and cs.rank_lambda == 5 else EXIT_FAIL


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spatch", description="S-Patch modeling kernel")
    sub = parser.add_subparsers(dest="command", required=True)

    def doc_cmd(name, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("document")
        p.add_argument("--lenient", action="store_true", help="warn on unknown fields instead of failing")
        return p

    p = doc_cmd("check", "construct patches and report diagonal degree checks")
    p.set_defaults(func=cmd_check)

    p = doc_cmd("build", "tessellate and export a mesh")
    p.add_argument("--out", required=True)
    p.add_argument("--resolution", type=int, default=16)
    p.add_argument("--pattern", choices=sorted(PATTERNS), default="main")
    p.set_defaults(func=cmd_build)

    p = doc_cmd("diag", "print diagonal polynomial coefficients")
    p.add_argument("--patch", required=True)
    p.add_argument("--samples", type=int, default=32)
    p.set_defaults(func=cmd_diag)

    p = doc_cmd("continuity", "report C0 gaps and normal angles across adjacencies")
    p.add_argument("--samples", type=int, default=33)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_continuity)

    p = sub.add_parser("demo", help="emit a demo configuration")
    p.add_argument("name", choices=["half-cube"])
    p.add_argument("--out-dir", required=True)
    p.add_argument("--resolution", type=int, default=8)
    p.add_argument("--samples", type=int, default=33)
    p.set_defaults(func=cmd_demo)

    p = sub.add_parser("verify-derivation", help="rebuild the constraint matrix and check its rank")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    level = os.environ.get("SPATCH_LOG_LEVEL", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), stream=sys.stderr)
    log.info("spatchkit %s", __version__)
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except CliError as exc:
        print(json.dumps({"error": exc.kind, "message": str(exc)}), file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print(json.dumps({"error": "io", "message": str(exc)}), file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
