import json

import pytest

from quasicop.cli import main


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def t0_file(tmp_path, capsys):
    path = tmp_path / "t0.txt"
    assert run(capsys, "make", "t0", "--out", path)[0] == 0
    return path


def test_validate(capsys, t0_file):
    assert run(capsys, "validate", t0_file) == (0, "valid, proper\n", "")


def test_validate_bad(capsys, tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("order 2\n1/2 -1/2\n1/2 1/2\n")
    code, out, _ = run(capsys, "validate", bad)
    assert code == 2
    assert "column 2" in out


def test_eval_exact(capsys, t0_file):
    code, out, _ = run(capsys, "eval", t0_file, "--point", "1/3,2/3")
    assert code == 0
    assert "exact 1/3" in out and "error_bound 0" in out


def test_eval_decimal_warns(capsys, t0_file):
    code, out, err = run(capsys, "eval", t0_file, "--point", "0.5,0.5")
    assert code == 0 and "warning" in err
    assert out.startswith("value 0.25")


def test_volume(capsys, t0_file):
    code, out, _ = run(capsys, "volume", t0_file, "--rect", "1/3,2/3,1/3,2/3")
    assert code == 0
    assert out.splitlines()[0] == "volume -1/3"


def test_support_and_box(capsys, t0_file, tmp_path):
    img = tmp_path / "s.pgm"
    js = tmp_path / "s.json"
    code, out, _ = run(capsys, "support", t0_file, "--depth", 3, "--res", 81, "--out", img, "--json", js)
    assert code == 0
    assert "rectangles 125" in out
    assert len(json.loads(js.read_text())) == 125
    code, out, _ = run(capsys, "dim", "box", "--mask", img, "--scales", "1/3,1/9,1/27")
    assert code == 0
    assert "counts 5 25 125" in out


def test_dim_moran_and_family(capsys, tmp_path):
    js = tmp_path / "d.json"
    code, out, _ = run(capsys, "dim", "moran", "--ratios", "1/2,1/2,1/2,1/2", "--json", js)
    assert code == 0 and out.startswith("s 2")
    assert abs(json.loads(js.read_text())["s"] - 2) < 1e-12
    code, out, _ = run(capsys, "dim", "family", "--r", "1/2")
    assert out.startswith("s 1.47511460738")
    code, out, _ = run(capsys, "dim", "family", "--s", "1.5")
    assert code == 0 and out.startswith("r ")
    assert run(capsys, "dim", "family")[0] == 1


def test_make_nd_and_lattice(capsys, tmp_path):
    path = tmp_path / "step.json"
    assert run(capsys, "make", "step:3,1/2", "--out", path)[0] == 0
    assert run(capsys, "validate", path)[1] == "valid, proper\n"
    out_json = tmp_path / "lat.json"
    assert run(capsys, "lattice", path, "--depth", 1, "--out", out_json)[0] == 0
    doc = json.loads(out_json.read_text())
    assert doc["shape"] == [5, 5, 5] and doc["values"][-1] == "1"


def test_axioms(capsys, t0_file):
    code, out, _ = run(capsys, "axioms", t0_file, "--samples", 200)
    assert code == 0 and out.endswith("ok\n")


def test_grid(capsys, t0_file, tmp_path):
    out = tmp_path / "g.csv"
    assert run(capsys, "grid", t0_file, "--n", 4, "--out", out)[0] == 0
    assert len(out.read_text().splitlines()) == 17


def test_usage_errors(capsys, t0_file, tmp_path):
    assert run(capsys, "make", "hexagon", "--out", tmp_path / "x")[0] == 1
    assert run(capsys, "eval", t0_file, "--point", "1/2")[0] == 1
    assert run(capsys, "eval", tmp_path / "missing.txt", "--point", "1/2,1/2")[0] == 1
    assert run(capsys, "frobnicate")[0] == 1
    code, _, _ = run(capsys, "support", t0_file, "--depth", 1, "--res", 4, "--out", tmp_path / "x.pgm")
    assert code == 1
