import csv
import io
import json
import subprocess
import sys

import pytest

from delsarte.cli import main, parse_range


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture(scope="module")
def cert43_path(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli") / "m43.json"
    assert main(["solve", "--m", "43", "--out", str(path)]) == 0
    return path


def test_solve_m43_summary(capsys, tmp_path):
    code, out, _ = run(capsys, "solve", "--m", "43", "--out", str(tmp_path / "c.json"))
    assert code == 0
    assert out.startswith("m=43 w=170133239.5931416562")
    assert out.rstrip().endswith("even_floor=170133238 form=3 K=3 degree=18")


def test_solve_m24(capsys, tmp_path):
    code, out, _ = run(capsys, "solve", "--m", "24", "--out", str(tmp_path / "c.json"))
    assert code == 0 and "w=196560 " in out


def test_solve_default_path(capsys, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert run(capsys, "solve", "--m", "5")[0] == 0
    assert json.loads((tmp_path / "certificate-m5.json").read_text())["bound"]["w"] == "42"


def test_solve_m2_unsupported(capsys, tmp_path):
    code, _, err = run(capsys, "solve", "--m", "2", "--out", str(tmp_path / "c.json"))
    assert code == 2 and "unsupported" in err


def test_solve_wrong_structure_exit_2(capsys, tmp_path):
    code, _, err = run(capsys, "solve", "--m", "10", "--form", "4", "--k", "1", "--out", str(tmp_path / "c.json"))
    assert code == 2 and "WrongStructure" in err


def test_solve_decimal_s_rejected(capsys, tmp_path):
    assert run(capsys, "solve", "--m", "10", "--s", "0.5", "--out", str(tmp_path / "c.json"))[0] == 2


def test_verify_fresh(capsys, cert43_path):
    code, out, _ = run(capsys, "verify", str(cert43_path))
    assert code == 0
    names = [line.split()[0] for line in out.splitlines()]
    for check in ("weights", "exactness", "positivity", "class_membership", "zeros", "duality_gap"):
        assert check in names


def test_verify_tampered_weight(capsys, cert43_path, tmp_path):
    doc = json.loads(cert43_path.read_text())
    doc["functional"]["weights"][0] = doc["functional"]["weights"][0].replace("1.1755492", "1.1755493", 1)
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(doc))
    code, _, err = run(capsys, "verify", str(bad))
    assert code == 3 and "duality_gap" in err


def test_verify_missing_file(capsys, tmp_path):
    assert run(capsys, "verify", str(tmp_path / "missing.json"))[0] == 4


def test_verify_garbage(capsys, tmp_path):
    p = tmp_path / "g.json"
    p.write_text("[1, 2")
    assert run(capsys, "verify", str(p))[0] == 4


def test_table_9_15(capsys):
    code, out, _ = run(capsys, "table", "--range", "9..15")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 7
    assert all(r["status"] == "exact" for r in rows)
    assert rows[0]["w"] == "26730/73"


def test_table_100_103(capsys):
    code, out, _ = run(capsys, "table", "--range", "100..103", "--format", "json")
    rows = json.loads(out)
    assert code == 0 and [r["status"] for r in rows] == ["no-registry"] * 4


def test_table_4_8(capsys, tmp_path):
    path = tmp_path / "t.csv"
    assert run(capsys, "table", "--range", "4..8", "--out", str(path), "--jobs", "2")[0] == 0
    rows = list(csv.DictReader(path.open()))
    assert [(r["m"], r["w"]) for r in rows] == [("4", "24"), ("5", "42"), ("6", "72"), ("7", "126"), ("8", "240")]


def test_parse_range():
    assert parse_range("3..5") == range(3, 6)
    with pytest.raises(Exception):
        parse_range("5..3")


@pytest.mark.parametrize("m,deg,grid,w_prefix,guess", [
    ("10", "6", "1001", "549.99", "form=1 K=1"),
    ("4", "4", "201", "24", "form=2 K=0"),
    ("43", "18", "2001", None, "form=3 K=3"),
])
def test_estimate(capsys, m, deg, grid, w_prefix, guess):
    code, out, _ = run(capsys, "estimate", "--m", m, "--degree", deg, "--grid", grid)
    assert code == 0
    line, best = out.splitlines()[:2]
    if w_prefix:
        assert line.split("w_estimate=")[1].startswith(w_prefix)
    assert best.startswith("guess " + guess)


def test_deterministic_output(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    cmd = [sys.executable, "-m", "delsarte.cli", "solve", "--m", "43"]
    out1 = subprocess.run(cmd + ["--out", str(a)], capture_output=True, text=True, check=True).stdout
    out2 = subprocess.run(cmd + ["--out", str(b)], capture_output=True, text=True, check=True).stdout
    assert out1 == out2
    assert a.read_bytes() == b.read_bytes()


def test_precision_env(tmp_path, monkeypatch):
    monkeypatch.setenv("DELSARTE_PRECISION_BITS", "320")
    path = tmp_path / "c.json"
    assert main(["solve", "--m", "10", "--out", str(path)]) == 0
    assert json.loads(path.read_text())["precision_bits"] == 320
