import io
import os
import sys

import pytest

from adtsolve.cli import main

LISTS = """
(declare-datatypes ((Colour 0) (CList 0))
  (((red) (green) (blue))
   ((nil) (cons (head Colour) (tail CList)))))
(declare-const x CList)
(declare-const y Colour)
"""

EX1 = LISTS + """
(assert ((_ is cons) x))
(assert (not (= y blue)))
(assert (or (= (head x) red) (= x (cons y nil))))
(check-sat)
(get-model)
"""

NAT = """
(declare-datatypes ((Nat 0)) (((one) (succ (pred Nat)))))
(declare-const x Nat)
(assert ((_ is succ) x))
(check-sat)
"""

FAKES = os.path.join(os.path.dirname(__file__), "fakes")


def run(args):
    out = io.StringIO()
    code = main(args, out=out)
    return code, out.getvalue()


@pytest.fixture
def ex1_file(tmp_path):
    p = tmp_path / "ex1.smt2"
    p.write_text(EX1)
    return str(p)


@pytest.fixture
def nat_file(tmp_path):
    p = tmp_path / "nat.smt2"
    p.write_text(NAT)
    return str(p)


def test_solve_sat_with_model(ex1_file):
    code, out = run(["solve", ex1_file])
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "sat"
    assert any(l.startswith("(define-fun x () CList (cons") for l in lines)
    assert any(l.startswith("(define-fun y () Colour") for l in lines)


def test_solve_check_model_flag(ex1_file):
    code, out = run(["solve", ex1_file, "--check-model"])
    assert code == 0
    assert out.splitlines()[0] == "sat"
    assert "model check: ok" in out


def test_solve_unsat(tmp_path):
    p = tmp_path / "u.smt2"
    p.write_text(LISTS + "(assert ((_ is cons) x)) (assert ((_ is nil) x))")
    code, out = run(["solve", str(p)])
    assert code == 0
    assert out.strip() == "unsat"


def test_solve_unknown_with_diagnosis(tmp_path):
    p = tmp_path / "n.smt2"
    p.write_text("""
(declare-datatypes ((Nat 0)) (((one) (succ (pred Nat)))))
(declare-const x Nat)
(declare-const y Nat)
(assert (not (= x y)))
(assert (= (adt.size x) (adt.size y)))
""")
    code, out = run(["solve", str(p), "--fuel", "5"])
    assert code == 0
    assert out.splitlines()[0] == "unknown"
    assert "non-expanding" in out


def test_analyze_nat(nat_file):
    code, out = run(["analyze", nat_file])
    assert code == 0
    assert "Nat: non-expanding (cycle: Nat -> succ -> Nat)" in out
    assert "Nat: cardinality infinite" in out


def test_analyze_lists(ex1_file):
    code, out = run(["analyze", ex1_file])
    assert code == 0
    assert "Colour: cardinality 3" in out
    assert "Colour: size image {1}" in out
    assert "CList: expanding" in out
    assert "decision procedure complete" in out


def test_emit_contains_reduction_symbols(ex1_file):
    code, out = run(["emit", ex1_file, "--no-simplify"])
    assert code == 0
    assert "ctorId_CList" in out
    assert "depth_CList" in out
    assert "_s1" in out
    assert "(check-sat)" in out


def test_emit_no_opt_differs(ex1_file):
    _, with_opt = run(["emit", ex1_file, "--no-simplify"])
    _, without = run(["emit", ex1_file, "--no-simplify", "--no-opt"])
    assert with_opt != without
    assert "ctorId_Colour" in without
    assert "ctorId_Colour" not in with_opt


def test_stats_line(ex1_file):
    code, out = run(["solve", ex1_file, "--stats"])
    assert code == 0
    assert "nodes: input=" in out


def test_deterministic_output(ex1_file):
    a = run(["solve", ex1_file, "--stats"])
    b = run(["solve", ex1_file, "--stats"])
    assert a == b
    c = run(["emit", ex1_file])
    d = run(["emit", ex1_file])
    assert c == d


def test_usage_error_exit_code():
    assert main(["frobnicate"]) == 1
    assert main([]) == 1


def test_input_error_exit_code(tmp_path):
    p = tmp_path / "bad.smt2"
    p.write_text("(assert (= x")
    assert main(["solve", str(p)]) == 2
    missing = tmp_path / "missing.smt2"
    assert main(["solve", str(missing)]) == 2


def test_backend_error_exit_code(ex1_file):
    assert main(["solve", ex1_file, "--backend", "external",
                 "--external-cmd", "/nonexistent/solver-xyz"]) == 3


def test_interpolate_without_backend_exit_code(ex1_file, tmp_path):
    other = tmp_path / "b.smt2"
    other.write_text(EX1)
    assert main(["interpolate", ex1_file, str(other)]) == 3


def test_interpolate_with_fake_backend(tmp_path):
    a = tmp_path / "a.smt2"
    a.write_text(LISTS + """
(declare-const z CList)
(assert (= z (tail x)))
(assert ((_ is cons) z))
(assert (not (= (head x) (head z))))
""")
    b = tmp_path / "b.smt2"
    b.write_text(LISTS + """
(declare-const c2 Colour)
(declare-const rest CList)
(assert (= x (cons c2 (cons c2 rest))))
""")
    cmd = f"{sys.executable} {os.path.join(FAKES, 'itp_smtinterpol.py')}"
    code, out = run(["interpolate", str(a), str(b), "--external-cmd", cmd])
    assert code == 0
    assert out.strip() == "(not (= (head x) (head (tail x))))"


def test_corpus_subcommand():
    code, out = run(["corpus", "--count", "30", "--sigs", "2", "--seed", "7"])
    assert code == 0
    assert "instances: 30" in out
    assert "failures: 0" in out


def test_corpus_deterministic():
    a = run(["corpus", "--count", "20", "--sigs", "2", "--seed", "3"])
    b = run(["corpus", "--count", "20", "--sigs", "2", "--seed", "3"])
    assert a == b


def test_external_backend_with_fake(ex1_file):
    cmd = f"{sys.executable} {os.path.join(FAKES, 'smt_unsat.py')}"
    code, out = run(["solve", ex1_file, "--backend", "external",
                     "--external-cmd", cmd])
    assert code == 0
    assert out.strip() == "unsat"


def test_external_backend_without_command_is_a_backend_error(ex1_file, monkeypatch):
    monkeypatch.delenv("ADTSOLVE_EXTERNAL_CMD", raising=False)
    assert main(["solve", ex1_file, "--backend", "external"]) == 3
