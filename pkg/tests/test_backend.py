import os
import sys

import pytest
from hypothesis import given

from adtsolve import backend
from adtsolve.errors import ProtocolError, SpawnError
from adtsolve.normalize import flatten, to_nnf
from adtsolve.parser import parse_script
from adtsolve.reduce import (
    RApp, REq, RLin, RNot, RVar, ReduceOptions, rand, reduce,
)
from tests.test_semantics import formulas

FAKES = os.path.join(os.path.dirname(__file__), "fakes")


def wrap(formula, lists_sig):
    """Package a bare reduced formula for the solver."""
    flat = flatten(to_nnf(__import__("adtsolve.terms", fromlist=["TRUE"]).TRUE),
                   lists_sig)
    from adtsolve.reduce import SymbolTable, ReducedFormula
    table = SymbolTable(lists_sig, "depth")
    return ReducedFormula(formula, table, "depth", flat, ReduceOptions(), lists_sig)


def ex1_reduct(lists_sig, fml):
    phi = fml("(and ((_ is cons) x) (not (= y blue)) "
              "(or (= (head x) red) (= x (cons y nil))))")
    return reduce(flatten(to_nnf(phi), lists_sig), lists_sig, "depth")


def test_example_reduct_sat(lists_sig, fml):
    res = backend.solve(ex1_reduct(lists_sig, fml))
    assert res.status == "sat"
    assert backend.eval_reduced(ex1_reduct(lists_sig, fml).formula, res.model)


def test_congruence_unsat(lists_sig):
    f = rand([
        REq(RApp("f", (RVar("a"),)), RVar("b")),
        REq(RVar("a"), RVar("c")),
        RNot(REq(RApp("f", (RVar("c"),)), RVar("b"))),
    ])
    assert backend.solve(wrap(f, lists_sig)).status == "unsat"


def test_contradiction_unsat(lists_sig):
    f = rand([REq(RVar("x"), RVar("y")), RNot(REq(RVar("x"), RVar("y")))])
    assert backend.solve(wrap(f, lists_sig)).status == "unsat"


def test_arith_with_functions(lists_sig):
    # f(x) < f(y) forces x != y
    f = rand([
        RLin("le", ((1, RApp("f", (RVar("x"),))), (-1, RApp("f", (RVar("y"),)))), 1),
        REq(RVar("x"), RVar("y")),
    ])
    assert backend.solve(wrap(f, lists_sig)).status == "unsat"


def test_determinism(lists_sig, fml):
    r = ex1_reduct(lists_sig, fml)
    a = backend.solve(r)
    b = backend.solve(r)
    assert a.status == b.status == "sat"
    assert a.model.values == b.model.values
    assert a.model.funcs == b.model.funcs


@given(formulas(allow_size=False))
def test_every_sat_model_reevaluates(lists_sig, phi):
    r = reduce(flatten(to_nnf(phi), lists_sig), lists_sig, "depth")
    res = backend.solve(r)
    if res.status == "sat":
        assert backend.eval_reduced(r.formula, res.model)


# -- emission ---------------------------------------------------------------------

def test_emit_reparses(lists_sig, fml):
    r = ex1_reduct(lists_sig, fml)
    script = backend.emit_smtlib(r)
    reparsed = parse_script(script)
    assert len(reparsed.asserts) == 1
    assert reparsed.commands == ["check-sat", "get-model"]


def test_emit_declares_source_arities(lists_sig, fml):
    r = ex1_reduct(lists_sig, fml)
    script = backend.emit_smtlib(r)
    assert "(declare-fun cons (Int Int) Int)" in script
    assert "(declare-fun head (Int) Int)" in script
    assert "(declare-fun ctorId_CList (Int) Int)" in script
    assert "(declare-fun depth_CList (Int) Int)" in script


def test_emit_deterministic(lists_sig, fml):
    assert backend.emit_smtlib(ex1_reduct(lists_sig, fml)) == \
        backend.emit_smtlib(ex1_reduct(lists_sig, fml))


# -- external client ---------------------------------------------------------------

def _fake(name):
    return f"{sys.executable} {os.path.join(FAKES, name)}"


def test_external_sat_with_model(lists_sig, fml):
    res = backend.solve_external(ex1_reduct(lists_sig, fml), _fake("smt_sat.py"))
    assert res.status == "sat"
    assert res.model.values["x"] == 3
    assert res.model.funcs["f"] == {(3,): 7}
    assert res.model.defaults["f"] == 0


def test_external_unsat(lists_sig, fml):
    res = backend.solve_external(ex1_reduct(lists_sig, fml), _fake("smt_unsat.py"))
    assert res.status == "unsat"


def test_external_unknown(lists_sig, fml):
    res = backend.solve_external(ex1_reduct(lists_sig, fml), _fake("smt_unknown.py"))
    assert res.status == "unknown"


def test_external_protocol_error(lists_sig, fml):
    with pytest.raises(ProtocolError) as e:
        backend.solve_external(ex1_reduct(lists_sig, fml), _fake("smt_garbage.py"))
    assert "flurble" in e.value.raw or "flurble" in str(e.value)


def test_external_spawn_error(lists_sig, fml):
    with pytest.raises(SpawnError):
        backend.solve_external(ex1_reduct(lists_sig, fml), "/nonexistent/solver-xyz")


EXTERNAL = os.environ.get("ADTSOLVE_EXTERNAL_CMD")


@pytest.mark.skipif(not EXTERNAL, reason="no external SMT solver configured")
def test_external_agrees_with_builtin(lists_sig, fml):
    r = ex1_reduct(lists_sig, fml)
    ours = backend.solve(r)
    theirs = backend.solve_external(r, EXTERNAL)
    assert ours.status == theirs.status == "sat"
    assert backend.eval_reduced(r.formula, theirs.model)


def test_general_disequality_split(lists_sig):
    # x + y != 3 with x + y pushed onto 3 by bounds: must still find a model
    f = rand([
        RLin("ne", ((1, RVar("x")), (1, RVar("y"))), -3),
        RLin("le", ((-1, RVar("x")),), 1),   # x >= 1
        RLin("le", ((1, RVar("x")),), -2),   # x <= 2
        RLin("le", ((-1, RVar("y")),), 1),   # y >= 1
        RLin("le", ((1, RVar("y")),), -2),   # y <= 2
    ])
    res = backend.solve(wrap(f, lists_sig))
    assert res.status == "sat"
    assert res.model.value("x") + res.model.value("y") != 3
    # pinning both sides to 3 makes it unsat
    g = rand([
        RLin("ne", ((1, RVar("x")), (1, RVar("y"))), -3),
        RLin("eq", ((1, RVar("x")),), -1),
        RLin("eq", ((1, RVar("y")),), -2),
    ])
    assert backend.solve(wrap(g, lists_sig)).status == "unsat"


def test_pure_integer_formula_through_pipeline(lists_sig):
    from adtsolve.parser import parse_script
    from adtsolve.sizesolve import decide
    script = parse_script("""
(declare-datatypes ((Colour 0) (CList 0))
  (((red) (green) (blue)) ((nil) (cons (head Colour) (tail CList)))))
(declare-const n Int)
(declare-const m Int)
(assert (< n m))
(assert (< m n))
""")
    assert decide(script.formula(), script.sig).status == "unsat"
    script2 = parse_script("""
(declare-datatypes ((E 0)) (((a) (b))))
(declare-const n Int)
(assert (< 3 n))
(assert (< n 5))
""")
    res = decide(script2.formula(), script2.sig)
    assert res.status == "sat"
    assert res.model.ints["n"] == 4
