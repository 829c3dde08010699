from __future__ import annotations

import shutil
import subprocess
import sys

import pytest

from qtorus import pipelines as pl
from qtorus.cli import main
from qtorus.recursion import forward_solve


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def data_copy(tmp_path):
    target = tmp_path / "data"
    shutil.copytree(pl.data_dir(), target)
    return target


def test_verify_paper_reports_every_check(capsys):
    code, out, _ = run(capsys, "verify-paper", "--machine")
    lines = dict(line.split()[1:] for line in out.splitlines())
    assert lines["trefoil-pipeline"] == "PASS"
    assert lines["homfly-match"] == "PASS"
    assert lines["hopf-match-units"] == "PASS"
    assert lines["hopf-match"] == "FAIL"
    assert lines["fgs-mirror"] == "FAIL"
    assert code == 1


def test_verify_paper_is_deterministic(capsys):
    first = run(capsys, "verify-paper")
    second = run(capsys, "verify-paper")
    assert first == second
    assert "first difference" in first[1]


def test_mutated_dataset_is_caught(capsys, data_copy):
    path = data_copy / "trefoil.rel"
    text = path.read_text()
    assert "Hc22" in text
    lines = text.splitlines()
    i = next(k for k, ln in enumerate(lines) if ln.startswith("Hc22"))
    lines[i] = lines[i] + " + Q^5"
    path.write_text("\n".join(lines) + "\n")
    code, out, _ = run(capsys, "--data", str(data_copy), "verify-paper", "--machine")
    assert code == 1
    assert "CHECK trefoil-pipeline FAIL" in out


def test_missing_dataset_file(capsys, data_copy):
    (data_copy / "hopf.rel").unlink()
    code, _, err = run(capsys, "--data", str(data_copy), "hopf-relations")
    assert code == 2
    assert "hopf.rel" in err


def test_trefoil_qaug_framings(capsys):
    code, out, _ = run(capsys, "trefoil-qaug", "--framing", "0")
    assert code == 0
    assert out.strip() == str(pl.printed_qaug0())
    code, out, _ = run(capsys, "trefoil-qaug", "--steps")
    assert code == 0 and "# expect E: ok" in out


def test_hopf_relations(capsys):
    code, out, _ = run(capsys, "hopf-relations")
    assert "match A: exact" in out
    assert "match C: up to left unit -1" in out
    assert code == 1


def test_classical_aug(capsys):
    code, out, _ = run(capsys, "classical-aug", "unknot")
    assert code == 0 and out.strip()
    code, out, _ = run(capsys, "classical-aug", "trefoil")
    assert code == 0 and "resultant = (l) * polynomial" in out


def test_check_annihilation(capsys, tmp_path):
    op = tmp_path / "U.op"
    op.write_text("U = 1 - l - m + Q*l*m\n")
    seq = tmp_path / "h.seq"
    U = pl.load_relations("unknot.rel")["U"]
    seq.write_text(forward_solve(U, [1], 6).to_text())
    code, out, _ = run(capsys, "check-annihilation", "--op", str(op), "--seq", str(seq))
    assert code == 0 and "PASS" in out
    seq.write_text(seq.read_text().replace("0: 1", "0: 2"))
    code, out, _ = run(capsys, "check-annihilation", "--op", str(op), "--seq", str(seq))
    assert code == 1 and "(P f)(1) = Q - 1" in out


def test_check_framing(capsys):
    for fp in ("-2", "1", "3"):
        code, out, _ = run(capsys, "check-framing", "--fprime", fp, "--n-max", "6")
        assert code == 0, out


def test_annulus_and_wkb(capsys):
    code, out, _ = run(capsys, "annulus", "--order", "4")
    assert code == 0 and "(1,1,0): Q - 1\n" in out
    code, out, _ = run(capsys, "wkb", "--x-order", "3", "--g-order", "2")
    assert code == 0 and "CHECK wkb-vs-recursion PASS" in out
    code, _, err = run(capsys, "wkb", "--knot", "trefoil")
    assert code == 2 and "trefoil" in err
    code, _, _ = run(capsys, "annulus", "--order", "1")
    assert code == 2


def test_expr(capsys):
    assert run(capsys, "expr", "mul", "m", "l")[:2] == (0, "q * l * m\n")
    code, _, err = run(capsys, "expr", "parse", "l ^^ 2")
    assert code == 2 and err.startswith("error:")
    code, out, _ = run(capsys, "expr", "normalize", "d12*a12")
    assert code == 0 and "a12" in out


def test_missing_input_file(capsys, tmp_path):
    code, _, err = run(capsys, "check-annihilation", "--op", str(tmp_path / "no.op"), "--seq", str(tmp_path / "no.seq"))
    assert code == 2 and "cannot read" in err


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "qtorus.cli", "expr", "mul", "m", "l"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout == "q * l * m\n"
    proc = subprocess.run([sys.executable, "-m", "qtorus.cli", "no-such-command"], capture_output=True, text=True)
    assert proc.returncode == 2
