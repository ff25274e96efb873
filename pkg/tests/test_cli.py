import json
import re
import subprocess
import sys

import pytest

from spatchkit.cli import main

from test_document import SQUARE, read_obj

E11_DOC = {
    "version": 1,
    "patches": [
        {
            "id": "e11",
            "corners": [[1, 1, 1], [0, 0, 0], [0, 0, 0], [0, 0, 0]],
            "tangents_u": [[0, 0, 0]] * 4,
            "tangents_v": [[0, 0, 0]] * 4,
        }
    ],
}


@pytest.fixture
def square_file(tmp_path):
    path = tmp_path / "square.json"
    path.write_text(json.dumps(SQUARE))
    return path


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_verify_derivation(capsys):
    code, out, _ = run(capsys, "verify-derivation")
    assert code == 0
    assert "rank(Lambda) = 5" in out
    assert "Lambda matches reference table: yes" in out


def test_check_passes(capsys, square_file):
    code, out, _ = run(capsys, "check", square_file)
    assert code == 0 and "PASS" in out


def test_check_incompatible(capsys, tmp_path):
    path = tmp_path / "e11.json"
    path.write_text(json.dumps(E11_DOC))
    code, out, _ = run(capsys, "check", path)
    assert code == 1
    assert "FAIL" in out
    assert re.search(r"hermite x main\s+a6=4 a5=-12 a4=9", out)


def test_build_obj(capsys, tmp_path, square_file):
    out_path = tmp_path / "sq.obj"
    code, out, _ = run(capsys, "build", square_file, "--out", out_path, "--resolution", 4)
    assert code == 0
    v, vn, f = read_obj(out_path.read_text())
    assert (len(v), len(vn), len(f)) == (25, 25, 32)


def test_build_deterministic(capsys, tmp_path, square_file):
    for name in ("a.ply", "b.ply"):
        assert run(capsys, "build", square_file, "--out", tmp_path / name, "--pattern", "alt")[0] == 0
    assert (tmp_path / "a.ply").read_bytes() == (tmp_path / "b.ply").read_bytes()


def test_diag(capsys, square_file):
    code, out, _ = run(capsys, "diag", square_file, "--patch", "sq")
    assert code == 0
    assert "main x: a0=0 a1=1 a2=0 a3=0 a4=0 a5=0 a6=0" in out
    assert "cubic-fit residual" in out


def test_demo_and_continuity(capsys, tmp_path):
    code, out, _ = run(capsys, "demo", "half-cube", "--out-dir", tmp_path)
    assert code == 0 and "FLAGGED" in out
    for name in ("half_cube.json", "half_cube.obj", "continuity.json", "half_cube_bottom.obj"):
        assert (tmp_path / name).exists()
    code, out, _ = run(capsys, "continuity", tmp_path / "half_cube.json", "--json")
    assert code == 0
    report = json.loads(out)
    assert len(report["edges"]) == 3
    assert all(e["max_gap"] == 0 for e in report["edges"])
    assert json.loads((tmp_path / "continuity.json").read_text()) == report


@pytest.mark.parametrize(
    "argv,kind",
    [
        (["check", "/nonexistent/doc.json"], "io"),
        (["build", "{sq}", "--out", "x.stl"], "usage"),
        (["diag", "{sq}", "--patch", "missing"], "usage"),
        (["check", "{bad}"], "document"),
    ],
)
def test_errors_are_json(capsys, tmp_path, square_file, argv, kind):
    bad = tmp_path / "bad.json"
    bad.write_text('{"patches": []}')
    argv = [a.format(sq=square_file, bad=bad) for a in argv]
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert json.loads(err.strip().splitlines()[-1])["error"] == kind


def test_incompatible_build_errors(capsys, tmp_path):
    path = tmp_path / "e11.json"
    path.write_text(json.dumps(E11_DOC))
    code, _, err = run(capsys, "build", path, "--out", tmp_path / "x.obj")
    assert code == 2 and json.loads(err)["error"] == "incompatible"


def test_entry_point_module():
    res = subprocess.run(
        [sys.executable, "-m", "spatchkit.cli", "verify-derivation"], capture_output=True, text=True
    )
    assert res.returncode == 0 and "rank(Lambda) = 5" in res.stdout
