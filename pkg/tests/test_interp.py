import os
import sys

import pytest

from adtsolve.errors import UntranslatableError
from adtsolve.interp import (
    InterpolatingBackend, InterpolationProblem, back_translate, interpolate,
    interpolation_script, parse_reduced, validate_interpolant,
)
from adtsolve.normalize import flatten, to_nnf
from adtsolve.parser import parse_formula
from adtsolve.reduce import (
    RApp, RConst, REq, RLin, RNot, RVar, SymbolTable, reduce_partitions,
)
from adtsolve.semantics import print_formula
from adtsolve.sizesolve import decide
from adtsolve.terms import And, Ctor, Eq, FALSE, Not, Sel, Tester, Var

FAKES = os.path.join(os.path.dirname(__file__), "fakes")
VARS = {"x": "CList", "y": "CList", "z": "CList", "c": "Colour"}


def _fake(name):
    return f"{sys.executable} {os.path.join(FAKES, name)}"


def section_five_problem(sig):
    # one reconstruction of the partially elided source problem: the A side
    # links z to the tail of x
    a = parse_formula("(and (= z (tail x)) ((_ is cons) z) "
                      "(not (= (head x) (head z))))", sig, VARS)
    b = parse_formula("(= x (cons c (cons c y)))", sig, VARS)
    return InterpolationProblem(a, b, sig)


def reference_interpolant(sig):
    return parse_formula("(not (= (head x) (head (tail x))))", sig, VARS)


# -- validate_interpolant -------------------------------------------------------

def test_reference_interpolant_validates(lists_sig):
    prob = section_five_problem(lists_sig)
    i = reference_interpolant(lists_sig)
    assert decide(And((prob.b, i)), lists_sig).status == "unsat"
    assert decide(And((prob.a, Not(i))), lists_sig).status == "unsat"
    assert validate_interpolant(i, prob)


def test_vocabulary_violation_rejected(lists_sig):
    prob = section_five_problem(lists_sig)
    leaky = parse_formula("(= z nil)", lists_sig, VARS)
    assert not validate_interpolant(leaky, prob)


def test_false_is_not_an_interpolant_of_satisfiable_a(lists_sig):
    prob = section_five_problem(lists_sig)
    assert not validate_interpolant(FALSE, prob)


# -- back-translation --------------------------------------------------------------

def make_table(sig):
    table = SymbolTable(sig, "size", enum_sorts=frozenset({"Colour"}))
    table.adt_var("x", "CList")
    table.adt_var("y", "Colour")
    return table


def test_back_translate_head_index(lists_sig):
    table = make_table(lists_sig)
    cid = table.ctorid_fun("CList")
    out = back_translate(REq(RApp(cid, (RVar("x"),)), RConst(1)), table)
    assert out == Tester("cons", Var("x", "CList"))
    neg = back_translate(RNot(REq(RApp(cid, (RVar("x"),)), RConst(1))), table)
    assert neg == Not(Tester("cons", Var("x", "CList")))


def test_back_translate_enum_constant(lists_sig):
    table = make_table(lists_sig)
    out = back_translate(REq(RVar("y"), RConst(2)), table)
    assert out == Eq(Var("y", "Colour"), Ctor("blue"))


def test_back_translate_size(lists_sig):
    table = make_table(lists_sig)
    sz = table.size_fun("CList")
    out = back_translate(RLin("le", ((-1, RApp(sz, (RVar("x"),))),), 3), table)
    # -|x| + 3 <= 0
    assert "adt.size" in print_formula(lists_sig, out)
    model_term = Ctor("cons", (Ctor("red"), Ctor("cons", (Ctor("red"), Ctor("nil")))))
    from adtsolve.semantics import evaluate
    from adtsolve.terms import AdtModel
    assert evaluate(lists_sig, AdtModel({"x": model_term}), out)  # size 5 >= 3
    small = AdtModel({"x": Ctor("nil")})
    assert not evaluate(lists_sig, small, out)


def test_back_translate_applications(lists_sig):
    table = make_table(lists_sig)
    hd, tl = table.sel_fun("cons", 0), table.sel_fun("cons", 1)
    f = RNot(REq(RApp(hd, (RVar("x"),)), RApp(hd, (RApp(tl, (RVar("x"),)),))))
    out = back_translate(f, table)
    assert out == Not(Eq(Sel("cons", 0, Var("x", "CList")),
                         Sel("cons", 0, Sel("cons", 1, Var("x", "CList")))))


def test_back_translate_depth_fails(lists_sig):
    table = make_table(lists_sig)
    dep = table.depth_fun("CList")
    with pytest.raises(UntranslatableError):
        back_translate(RLin("le", ((1, RApp(dep, (RVar("x"),))),), 0), table)


def test_back_translate_arithmetic_on_infinite_sort_fails(lists_sig):
    table = make_table(lists_sig)
    with pytest.raises(UntranslatableError):
        back_translate(RLin("le", ((1, RVar("x")),), -3), table)


def test_back_translate_bad_head_index_fails(lists_sig):
    table = make_table(lists_sig)
    cid = table.ctorid_fun("CList")
    with pytest.raises(UntranslatableError):
        back_translate(REq(RApp(cid, (RVar("x"),)), RConst(9)), table)


def test_enum_tester_roundtrip(lists_sig):
    # reduce a tester literal, translate the reduct back: logically the same
    from adtsolve.reduce import reduce
    phi = parse_formula("((_ is blue) c)", lists_sig, VARS)
    flat = flatten(to_nnf(phi), lists_sig)
    r = reduce(flat, lists_sig, "size")
    body = [l for l in (r.formula.args if hasattr(r.formula, "args") else [r.formula])]
    eqs = [l for l in body if isinstance(l, REq)]
    out = back_translate(eqs[0], r.table)
    assert out == Eq(Var("c", "Colour"), Ctor("blue"))


# -- pipeline with fake backends -------------------------------------------------------

def test_pipeline_smtinterpol_dialect(lists_sig):
    prob = section_five_problem(lists_sig)
    backend = InterpolatingBackend(_fake("itp_smtinterpol.py"), dialect="smtinterpol")
    out = interpolate(prob, backend)
    assert out.kind == "interpolant"
    assert out.interpolant == reference_interpolant(lists_sig)


def test_pipeline_cvc5_dialect(lists_sig):
    prob = section_five_problem(lists_sig)
    backend = InterpolatingBackend(_fake("itp_cvc5.py"), dialect="cvc5")
    out = interpolate(prob, backend)
    assert out.kind == "interpolant"
    assert out.interpolant == reference_interpolant(lists_sig)


def test_pipeline_not_unsat(lists_sig):
    a = parse_formula("((_ is cons) x)", lists_sig, VARS)
    b = parse_formula("(= (head x) red)", lists_sig, VARS)
    backend = InterpolatingBackend(_fake("itp_smtinterpol.py"))
    out = interpolate(InterpolationProblem(a, b, lists_sig), backend)
    assert out.kind == "not-unsat"
    assert out.model is not None


def test_pipeline_untranslatable(lists_sig):
    prob = section_five_problem(lists_sig)
    backend = InterpolatingBackend(_fake("itp_depth.py"))
    out = interpolate(prob, backend)
    assert out.kind == "untranslatable"
    assert out.raw


def test_partition_locality_of_skolems(lists_sig):
    prob = section_five_problem(lists_sig)
    fa = flatten(to_nnf(prob.a), lists_sig, prefix="_ta")
    fb = flatten(to_nnf(prob.b), lists_sig, prefix="_tb")
    ra, rb = reduce_partitions([("A", fa), ("B", fb)], lists_sig)
    assert ra.table is rb.table
    script = interpolation_script(ra, rb, "smtinterpol")
    (a_line,) = [l for l in script.splitlines() if ":named partA" in l]
    (b_line,) = [l for l in script.splitlines() if ":named partB" in l]
    assert "_sb" not in a_line and "_tb" not in a_line
    assert "_sa" not in b_line and "_ta" not in b_line
    # interpolation always uses size mode: no depth functions anywhere
    assert "depth_" not in script
    assert "size_CList" in script


def test_parse_reduced_with_let(lists_sig):
    table = make_table(lists_sig)
    hd = table.sel_fun("cons", 0)
    text = f"(let ((a ({hd} x))) (not (= a 0)))"
    out = parse_reduced(text, table)
    assert isinstance(out, (RLin, RNot))


EXTERNAL_ITP = os.environ.get("ADTSOLVE_INTERPOLATOR_CMD")
EXTERNAL_DIALECT = os.environ.get("ADTSOLVE_INTERPOLATOR_DIALECT", "smtinterpol")


@pytest.mark.skipif(not EXTERNAL_ITP, reason="no external interpolating solver configured")
def test_pipeline_real_backend(lists_sig):
    prob = section_five_problem(lists_sig)
    backend = InterpolatingBackend(EXTERNAL_ITP, dialect=EXTERNAL_DIALECT)
    out = interpolate(prob, backend)
    assert out.kind == "interpolant"
    fv = __import__("adtsolve.terms", fromlist=["free_vars"]).free_vars(out.interpolant)
    assert {v.name for v in fv.adt} <= {"x"}


def test_pipeline_with_unfolding_and_term_interpolant(lists_sig):
    # A pins x to the unique size-3 list with a blue head; B denies exactly
    # that term; joint unsat needs the unfolding loop before interpolation
    a = parse_formula("(and (<= (adt.size x) 3) ((_ is cons) x) "
                      "(not (= (head x) red)) (not (= (head x) green)))",
                      lists_sig, VARS)
    b = parse_formula("(not (= x (cons blue nil)))", lists_sig, VARS)
    prob = InterpolationProblem(a, b, lists_sig)
    backend = InterpolatingBackend(_fake("itp_term.py"))
    out = interpolate(prob, backend)
    assert out.kind == "interpolant"
    assert out.interpolant == Eq(Var("x", "CList"),
                                 Ctor("cons", (Ctor("blue"), Ctor("nil"))))
