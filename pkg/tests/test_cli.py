import csv
import subprocess
import sys

import pytest

from tetstore import MeshStore, TetQuad, Vertex, assign_hcodes, save_archive
from tetstore.cli import main


def rows(path, delimiter=","):
    with open(path, newline="") as f:
        return [r for r in csv.reader(f, delimiter=delimiter) if r]


@pytest.fixture
def box1(tmp_path):
    path = tmp_path / "box.tmq"
    assert main(["gen", "--n", "1", "--out", str(path)]) == 0
    return path


def test_gen_and_surface(box1, tmp_path):
    out = tmp_path / "tris.csv"
    norm = tmp_path / "norm.csv"
    assert main(["surface", "--mesh", str(box1), "--out", str(out),
                 "--normalized-out", str(norm)]) == 0
    tris = rows(out)
    assert len(tris) == 12
    assert [int(r[0]) for r in tris] == list(range(1, 13))
    assert len(rows(norm)) == 36


def test_partition_ten_tets(tmp_path):
    coords = [(i * 1.0, (i * 0.37) % 1, (i * i * 0.13) % 1) for i in range(13)]
    verts = [Vertex(i, *c) for i, c in enumerate(coords)]
    store = MeshStore.from_quads(verts, [TetQuad(100 + e, e, e + 1, e + 2, e + 3)
                                         for e in range(10)])
    assign_hcodes(store)
    mesh = tmp_path / "strip.tmq"
    save_archive(store, mesh)
    out = tmp_path / "parts.csv"
    assert main(["partition", "--mesh", str(mesh), "--n", "3", "--out", str(out)]) == 0
    parts = [int(r[1]) for r in rows(out)]
    assert [parts.count(k) for k in (1, 2, 3)] == [4, 3, 3]
    assert parts == sorted(parts)


def test_locate_exterior_point(box1, tmp_path):
    pts = tmp_path / "pts.csv"
    pts.write_text("0.2,0.3,0.4\n5,5,5\n")
    out = tmp_path / "loc.csv"
    assert main(["locate", "--mesh", str(box1), "--points", str(pts), "--out", str(out),
                 "--threads", "1"]) == 0
    got = rows(out)
    assert got[1][-1] == "-1"
    assert int(got[0][-1]) > 0
    assert [float(v) for v in got[0][:3]] == [0.2, 0.3, 0.4]


def test_interp_and_strict(box1, tmp_path):
    field = tmp_path / "f.csv"
    field.write_text("".join(f"{v},{2.0 * v}\n" for v in range(1, 9)))
    pts = tmp_path / "p.csv"
    pts.write_text("0,0,0\n9,9,9\n")
    out = tmp_path / "o.csv"
    args = ["interp", "--mesh", str(box1), "--field", str(field), "--points", str(pts),
            "--out", str(out)]
    assert main(args) == 0
    got = rows(out)
    assert float(got[0][3]) == 2.0 and got[1][3] == "nan"
    assert main(args + ["--strict"]) == 1


def test_load_save_validate(tmp_path, box1, capsys):
    v, t = tmp_path / "v.csv", tmp_path / "t.csv"
    assert main(["save", "--mesh", str(box1), "--vertices-out", str(v), "--tets-out", str(t)]) == 0
    before = (v.read_bytes(), t.read_bytes())
    out = tmp_path / "loaded.tmq"
    assert main(["load", "--vertices", str(v), "--tets", str(t), "--out", str(out)]) == 0
    assert out.read_bytes() == box1.read_bytes()
    assert (v.read_bytes(), t.read_bytes()) == before
    assert main(["validate", "--mesh", str(out)]) == 0
    t.write_text(t.read_text() + "99,1,2,3,1000\n")
    assert main(["validate", "--vertices", str(v), "--tets", str(t)]) == 1
    assert "dangling-vertex" in capsys.readouterr().out


def test_errors_give_nonzero_exit(tmp_path, capsys):
    assert main(["locate", "--mesh", str(tmp_path / "nope.tmq"), "--points", "x",
                 "--out", "y"]) == 1
    assert "tetstore locate: error" in capsys.readouterr().err
    bad = tmp_path / "bad.tmq"
    bad.write_bytes(b"nonsense")
    assert main(["surface", "--mesh", str(bad), "--out", str(tmp_path / "o")]) == 1
    v = tmp_path / "v.csv"
    v.write_text("1,0,0\n")
    t = tmp_path / "t.csv"
    t.write_text("")
    assert main(["load", "--vertices", str(v), "--tets", str(t), "--out", str(tmp_path / "m")]) == 1
    assert "load-vertices" in capsys.readouterr().err


def test_bench_fixed_and_random(box1, tmp_path):
    out = tmp_path / "bench.csv"
    # centroid of the Kuhn tet 000-100-110-111; the box center lies on all six
    assert main(["bench", "--mesh", str(box1), "--center", "0.75,0.5,0.25", "--radius", "1e-5",
                 "0.3", "--total", "500", "--out", str(out), "--threads", "1"]) == 0
    table = rows(out)
    assert table[0][:5] == ["cx", "cy", "cz", "r", "points"]
    assert len(table) == 3
    assert table[1][7] == "1"
    out2 = tmp_path / "bench2.csv"
    assert main(["bench", "--mesh", str(box1), "--mode", "random-clouds", "--radius", "0.2",
                 "--clouds", "1", "10", "--total", "500", "--out", str(out2)]) == 0
    table = rows(out2)
    assert table[0][:4] == ["N", "N_cr", "mu_r", "sigma_r"]
    assert [r[:2] for r in table[1:]] == [["1", "500"], ["10", "50"]]
    assert main(["bench", "--mesh", str(box1), "--mode", "random-clouds", "--clouds", "3",
                 "--total", "500"]) == 1


def test_bench_deterministic_distinct(box1, tmp_path, capsys):
    args = ["bench", "--mesh", str(box1), "--radius", "0.2", "--total", "300", "--seed", "4"]
    main(args)
    first = capsys.readouterr().out.splitlines()[1].split(",")
    main(args)
    second = capsys.readouterr().out.splitlines()[1].split(",")
    assert first[7] == second[7]


def test_module_entry_point(box1):
    res = subprocess.run([sys.executable, "-m", "tetstore", "validate", "--mesh", str(box1)],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert "0 finding(s)" in res.stderr
