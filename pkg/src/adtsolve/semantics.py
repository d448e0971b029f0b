"""Evaluation of terms and formulas under explicit ADT models, and printing.

Constructors are absolutely free; selectors are total.  A selector applied to
a wrong-headed term takes the model's recorded override if present, and
otherwise the fixed default witness: the first term of the target sort in
enumeration order.  Term size counts constructor occurrences.
"""

from __future__ import annotations

from .errors import UnboundVariableError
from .signature import Signature, minimal_term
from .terms import (
    AdtModel, And, Ctor, Eq, FalseF, Formula, IntAdd, IntConst, IntExpr,
    IntMul, IntVar, Not, Or, Sel, SizeAtom, SizeOf, Term, Tester, TrueF, Var,
    ground_size,
)


def eval_term(sig: Signature, model: AdtModel, t: Term) -> Ctor:
    if isinstance(t, Var):
        if t.name not in model.adt:
            raise UnboundVariableError(t.name)
        return model.adt[t.name]
    if isinstance(t, Ctor):
        return Ctor(t.ctor, tuple(eval_term(sig, model, a) for a in t.args))
    assert isinstance(t, Sel)
    arg = eval_term(sig, model, t.arg)
    if arg.ctor == t.ctor:
        return arg.args[t.index]
    override = model.selector_overrides.get((t.ctor, t.index, arg))
    if override is not None:
        return override
    target_sort = sig.ctor(t.ctor).args[t.index][1]
    return minimal_term(sig, target_sort)


def eval_int(sig: Signature, model: AdtModel, e: IntExpr) -> int:
    if isinstance(e, IntConst):
        return e.value
    if isinstance(e, IntVar):
        if e.name not in model.ints:
            raise UnboundVariableError(e.name)
        return model.ints[e.name]
    if isinstance(e, SizeOf):
        return ground_size(eval_term(sig, model, e.arg))
    if isinstance(e, IntAdd):
        return sum(eval_int(sig, model, a) for a in e.args)
    if isinstance(e, IntMul):
        return e.coeff * eval_int(sig, model, e.arg)
    raise UnboundVariableError(f"uninterpreted function {e.fn} has no model")


_CMP = {
    "eq": lambda a, b: a == b,
    "ne": lambda a, b: a != b,
    "le": lambda a, b: a <= b,
    "lt": lambda a, b: a < b,
    "ge": lambda a, b: a >= b,
    "gt": lambda a, b: a > b,
}


def evaluate(sig: Signature, model: AdtModel, phi: Formula) -> bool:
    if isinstance(phi, TrueF):
        return True
    if isinstance(phi, FalseF):
        return False
    if isinstance(phi, Tester):
        return eval_term(sig, model, phi.arg).ctor == phi.ctor
    if isinstance(phi, Eq):
        return eval_term(sig, model, phi.lhs) == eval_term(sig, model, phi.rhs)
    if isinstance(phi, SizeAtom):
        return _CMP[phi.op](eval_int(sig, model, phi.lhs), eval_int(sig, model, phi.rhs))
    if isinstance(phi, Not):
        return not evaluate(sig, model, phi.arg)
    if isinstance(phi, And):
        return all(evaluate(sig, model, a) for a in phi.args)
    if isinstance(phi, Or):
        return any(evaluate(sig, model, a) for a in phi.args)
    raise AssertionError(phi)


# -- printing ------------------------------------------------------------------

def print_term(sig: Signature, t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Ctor):
        if not t.args:
            return t.ctor
        return "(" + " ".join([t.ctor] + [print_term(sig, a) for a in t.args]) + ")"
    return f"({sig.selector_name(t.ctor, t.index)} {print_term(sig, t.arg)})"


def print_int_expr(sig: Signature, e: IntExpr) -> str:
    if isinstance(e, IntConst):
        return str(e.value) if e.value >= 0 else f"(- {-e.value})"
    if isinstance(e, IntVar):
        return e.name
    if isinstance(e, SizeOf):
        return f"(adt.size {print_term(sig, e.arg)})"
    if isinstance(e, IntAdd):
        return "(+ " + " ".join(print_int_expr(sig, a) for a in e.args) + ")"
    if isinstance(e, IntMul):
        return f"(* {e.coeff} {print_int_expr(sig, e.arg)})"
    if not e.args:
        return e.fn
    return "(" + " ".join([e.fn] + [print_int_expr(sig, a) for a in e.args]) + ")"


_OP_TEXT = {"eq": "=", "le": "<=", "lt": "<", "ge": ">=", "gt": ">"}


def print_formula(sig: Signature, phi: Formula) -> str:
    if isinstance(phi, TrueF):
        return "true"
    if isinstance(phi, FalseF):
        return "false"
    if isinstance(phi, Tester):
        return f"((_ is {phi.ctor}) {print_term(sig, phi.arg)})"
    if isinstance(phi, Eq):
        return f"(= {print_term(sig, phi.lhs)} {print_term(sig, phi.rhs)})"
    if isinstance(phi, SizeAtom):
        lhs, rhs = print_int_expr(sig, phi.lhs), print_int_expr(sig, phi.rhs)
        if phi.op == "ne":
            return f"(distinct {lhs} {rhs})"
        return f"({_OP_TEXT[phi.op]} {lhs} {rhs})"
    if isinstance(phi, Not):
        return f"(not {print_formula(sig, phi.arg)})"
    if isinstance(phi, And):
        return "(and " + " ".join(print_formula(sig, a) for a in phi.args) + ")"
    if isinstance(phi, Or):
        return "(or " + " ".join(print_formula(sig, a) for a in phi.args) + ")"
    raise AssertionError(phi)


def print_model(sig: Signature, model: AdtModel, var_sorts: dict[str, str],
                only: set[str] | None = None) -> str:
    """SMT-LIB define-fun lines for the assigned variables."""
    lines = []
    for name, term in model.adt.items():
        if only is not None and name not in only:
            continue
        lines.append(f"(define-fun {name} () {var_sorts.get(name, '?')} {print_term(sig, term)})")
    for name, value in model.ints.items():
        if only is not None and name not in only:
            continue
        val = str(value) if value >= 0 else f"(- {-value})"
        lines.append(f"(define-fun {name} () Int {val})")
    return "\n".join(lines)
