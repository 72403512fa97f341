import csv
import io
import json
import math
import subprocess
import sys
from fractions import Fraction

import pytest

from betaescape.cli import CSV_HEADER, fmt20, main
from oracles import KL_DIGITS, tribonacci_escape


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_analyze_three_halves(capsys):
    code, out, _ = run(capsys, "analyze", "1.5", "--json")
    d = json.loads(out)
    assert code == 0
    assert d["method"] == "analytic" and d["E"] == 1


def test_analyze_two(capsys):
    code, out, _ = run(capsys, "--json", "analyze", "2")
    d = json.loads(out)
    assert (d["E"], d["dim"], d["method"]) == (0.0, 1.0, "beta2")


def test_analyze_tribonacci_polynomial(capsys):
    code, out, _ = run(capsys, "analyze", "poly:x^3-x^2-x-1 in (1,2)", "--json", "--no-empirical")
    d = json.loads(out)
    assert d["method"] == "bracket"
    assert d["bracket"]["lo"] <= tribonacci_escape() <= d["bracket"]["hi"]


def test_analyze_text_output(capsys):
    code, out, _ = run(capsys, "analyze", "1.9", "--no-empirical")
    assert code == 0
    keys = [line.split()[0] for line in out.splitlines()]
    assert keys[:5] == ["beta", "method", "E", "dim", "e"]
    assert "i_a" in keys


def test_global_flags_either_side(capsys):
    a = run(capsys, "--precision", "96", "analyze", "1.5", "--json")[1]
    b = run(capsys, "analyze", "1.5", "--json", "--precision", "96")[1]
    assert a == b
    assert json.loads(a)["precision_bits"] == 96


def test_precision_environment(capsys, monkeypatch):
    monkeypatch.setenv("BETAESCAPE_PRECISION", "80")
    d = json.loads(run(capsys, "analyze", "1.5", "--json")[1])
    assert d["precision_bits"] == 80
    monkeypatch.setenv("BETAESCAPE_PRECISION", "eighty")
    assert run(capsys, "analyze", "1.5")[0] == 1


@pytest.mark.parametrize("argv", [
    ["analyze", "2.5"],
    ["analyze", "banana"],
    ["frobnicate"],
    [],
    ["sweep", "--from", "1.9", "--to", "1.8", "--steps", "3"],
    ["sweep", "--from", "1.7", "--to", "1.8", "--steps", "1"],
    ["sft", "011"],
    ["analyze", "1.5", "--precision", "16"],
])
def test_usage_errors(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 1
    assert out == ""
    assert err


def test_undetermined_exit_code(capsys):
    # 1/golden is the hole endpoint itself, which floating point cannot place
    code, out, err = run(capsys, "univoque", "0.6180339887498948482045868343656381177", "golden")
    assert code == 2
    assert "undetermined" in out


def test_univoque_command(capsys):
    code, out, _ = run(capsys, "univoque", "0.9", "1.9", "--steps", "50", "--json")
    d = json.loads(out)
    assert (code, d["status"], d["step"]) == (0, "escapes", 50)


def test_constants_command(capsys):
    code, out, _ = run(capsys, "constants", "--name", "kl", "--digits", "12")
    assert out.strip()[:11] == KL_DIGITS
    assert len(out.strip()) == 13


def test_sft_command(capsys):
    code, out, _ = run(capsys, "sft", "110", "--count-up-to", "6", "--json")
    d = json.loads(out)
    assert d["block"] == "110"
    assert d["entropy"] == pytest.approx(0.481212, abs=1e-6)
    assert d["counts"] == [2, 4, 6, 10, 16, 26]
    assert json.loads(run(capsys, "sft", "11", "--json")[1])["entropy"] == pytest.approx(math.log(2))
    assert json.loads(run(capsys, "sft", "10", "--json")[1])["entropy"] == 0


def test_survivor_command(capsys, tmp_path):
    code, out, _ = run(capsys, "survivor", "1.5", "--depth", "5")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [float(r["measure_W"]) for r in rows] == pytest.approx(
        [(2 / 3) * (1 / 1.5) ** n for n in range(6)], rel=1e-15)
    out2 = run(capsys, "survivor", "2", "--depth", "5")[1]
    assert all(float(r["measure_W"]) == 1 for r in csv.DictReader(io.StringIO(out2)))
    path = tmp_path / "s.csv"
    run(capsys, "survivor", "1.9", "--depth", "30", "--out", str(path))
    rows = list(csv.DictReader(path.open(encoding="utf-8")))
    w = [float(r["measure_W"]) for r in rows]
    assert all(x > y for x, y in zip(w, w[1:]))
    assert "interval_count" in rows[0]


def test_sweep_below_golden(capsys, tmp_path):
    path = tmp_path / "low.csv"
    code, _, _ = run(capsys, "sweep", "--from", "1.3", "--to", "1.6", "--steps", "4",
                     "--out", str(path))
    text = path.read_text(encoding="utf-8")
    assert text.splitlines()[0] == CSV_HEADER
    rows = list(csv.DictReader(io.StringIO(text)))
    assert [r["beta"][:3] for r in rows] == ["1.3", "1.4", "1.5", "1.6"]
    assert all(float(r["E"]) == 1 and r["method"] == "analytic" for r in rows)


def test_sweep_jobs_are_deterministic(capsys, tmp_path):
    outs = []
    for jobs in ("1", "2", "1"):
        path = tmp_path / f"s{len(outs)}.csv"
        svg = tmp_path / f"s{len(outs)}.svg"
        run(capsys, "sweep", "--from", "1.8", "--to", "1.95", "--steps", "6",
            "--out", str(path), "--svg", str(svg), "--jobs", jobs)
        outs.append((path.read_bytes(), svg.read_bytes()))
    assert outs[0] == outs[1] == outs[2]
    assert b"<polyline" in outs[0][1]
    assert b"\r" not in outs[0][0]


def test_fmt20():
    assert fmt20(None) == ""
    assert fmt20(0) == "0"
    assert fmt20(1) == "1.0000000000000000000"
    assert len(fmt20(0.1267)) == len("0.") + 20
    assert fmt20(Fraction(7, 5)) == "1.4000000000000000000"


def test_console_script():
    proc = subprocess.run([sys.executable, "-m", "betaescape.cli", "constants", "--name", "golden",
                           "--digits", "10"], capture_output=True, text=True, check=True)
    assert proc.stdout.strip() == "1.618033989"
