"""Core term, formula, and integer-expression ASTs.

Terms are constructor terms over an ADT signature extended with variables
and selector applications; formulas combine testers, equalities, Boolean
structure, and Presburger atoms over term sizes.  All nodes are immutable
and hashable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Union


# -- terms -------------------------------------------------------------------

@dataclass(frozen=True)
class Var:
    name: str
    sort: str


@dataclass(frozen=True)
class Ctor:
    ctor: str
    args: tuple["Term", ...] = ()


@dataclass(frozen=True)
class Sel:
    ctor: str
    index: int
    arg: "Term"


Term = Union[Var, Ctor, Sel]


# -- integer expressions -------------------------------------------------------

@dataclass(frozen=True)
class IntConst:
    value: int


@dataclass(frozen=True)
class IntVar:
    name: str


@dataclass(frozen=True)
class SizeOf:
    arg: Term


@dataclass(frozen=True)
class IntAdd:
    args: tuple["IntExpr", ...]


@dataclass(frozen=True)
class IntMul:
    coeff: int
    arg: "IntExpr"


@dataclass(frozen=True)
class IntApp:
    """Uninterpreted integer function application (reparsed reducts only)."""

    fn: str
    args: tuple["IntExpr", ...]


IntExpr = Union[IntConst, IntVar, SizeOf, IntAdd, IntMul, IntApp]


# -- formulas ------------------------------------------------------------------

@dataclass(frozen=True)
class Tester:
    ctor: str
    arg: Term


@dataclass(frozen=True)
class Eq:
    lhs: Term
    rhs: Term


@dataclass(frozen=True)
class Not:
    arg: "Formula"


@dataclass(frozen=True)
class And:
    args: tuple["Formula", ...]


@dataclass(frozen=True)
class Or:
    args: tuple["Formula", ...]


@dataclass(frozen=True)
class TrueF:
    pass


@dataclass(frozen=True)
class FalseF:
    pass


SIZE_OPS = ("eq", "ne", "le", "lt", "ge", "gt")

NEGATED_OP = {"eq": "ne", "ne": "eq", "le": "gt", "gt": "le", "lt": "ge", "ge": "lt"}


@dataclass(frozen=True)
class SizeAtom:
    """Comparison of two linear integer expressions (a Presburger atom)."""

    op: str
    lhs: IntExpr
    rhs: IntExpr

    def __post_init__(self):
        assert self.op in SIZE_OPS


Formula = Union[Tester, Eq, Not, And, Or, TrueF, FalseF, SizeAtom]

TRUE = TrueF()
FALSE = FalseF()


def conj(args) -> Formula:
    args = tuple(args)
    if not args:
        return TRUE
    if len(args) == 1:
        return args[0]
    return And(args)


def disj(args) -> Formula:
    args = tuple(args)
    if not args:
        return FALSE
    if len(args) == 1:
        return args[0]
    return Or(args)


# -- models --------------------------------------------------------------------

@dataclass
class AdtModel:
    """Assignment of ground constructor terms to ADT variables and ints to
    integer variables.

    `selector_overrides` records the model's choice for selectors applied to
    wrong-headed terms, keyed by (ctor, index, ground argument term); absent
    keys fall back to the fixed default-witness policy of `semantics.evaluate`.
    """

    adt: dict[str, Term] = field(default_factory=dict)
    ints: dict[str, int] = field(default_factory=dict)
    selector_overrides: dict[tuple[str, int, Term], Term] = field(default_factory=dict)


# -- structural helpers ----------------------------------------------------------

def is_ground(t: Term) -> bool:
    if isinstance(t, Var):
        return False
    if isinstance(t, Sel):
        return False
    return all(is_ground(a) for a in t.args)


def ground_size(t: Term) -> int:
    """Number of constructor occurrences in a ground constructor term."""
    assert isinstance(t, Ctor)
    return 1 + sum(ground_size(a) for a in t.args)


def sub_terms(t: Term) -> Iterator[Term]:
    yield t
    if isinstance(t, Ctor):
        for a in t.args:
            yield from sub_terms(a)
    elif isinstance(t, Sel):
        yield from sub_terms(t.arg)


def term_vars(t: Term) -> Iterator[Var]:
    for s in sub_terms(t):
        if isinstance(s, Var):
            yield s


def int_expr_terms(e: IntExpr) -> Iterator[Term]:
    if isinstance(e, SizeOf):
        yield e.arg
    elif isinstance(e, IntAdd):
        for a in e.args:
            yield from int_expr_terms(a)
    elif isinstance(e, IntMul):
        yield from int_expr_terms(e.arg)
    elif isinstance(e, IntApp):
        for a in e.args:
            yield from int_expr_terms(a)


def int_expr_vars(e: IntExpr) -> Iterator[str]:
    if isinstance(e, IntVar):
        yield e.name
    elif isinstance(e, IntAdd):
        for a in e.args:
            yield from int_expr_vars(a)
    elif isinstance(e, IntMul):
        yield from int_expr_vars(e.arg)
    elif isinstance(e, IntApp):
        for a in e.args:
            yield from int_expr_vars(a)


@dataclass(frozen=True)
class FreeVars:
    adt: frozenset[Var]
    ints: frozenset[str]


def free_vars(phi: Formula) -> FreeVars:
    adt: set[Var] = set()
    ints: set[str] = set()

    def term(t: Term):
        adt.update(term_vars(t))

    def walk(f: Formula):
        if isinstance(f, (TrueF, FalseF)):
            return
        if isinstance(f, Tester):
            term(f.arg)
        elif isinstance(f, Eq):
            term(f.lhs)
            term(f.rhs)
        elif isinstance(f, SizeAtom):
            for e in (f.lhs, f.rhs):
                ints.update(int_expr_vars(e))
                for t in int_expr_terms(e):
                    term(t)
        elif isinstance(f, Not):
            walk(f.arg)
        elif isinstance(f, (And, Or)):
            for a in f.args:
                walk(a)
        else:
            raise AssertionError(f)

    walk(phi)
    return FreeVars(frozenset(adt), frozenset(ints))


def formula_nodes(phi: Formula) -> int:
    """Node count used by the blow-up statistics."""

    def ie(e: IntExpr) -> int:
        if isinstance(e, (IntConst, IntVar)):
            return 1
        if isinstance(e, SizeOf):
            return 1 + tn(e.arg)
        if isinstance(e, IntMul):
            return 1 + ie(e.arg)
        return 1 + sum(ie(a) for a in e.args)

    def tn(t: Term) -> int:
        if isinstance(t, Var):
            return 1
        if isinstance(t, Sel):
            return 1 + tn(t.arg)
        return 1 + sum(tn(a) for a in t.args)

    if isinstance(phi, (TrueF, FalseF)):
        return 1
    if isinstance(phi, Tester):
        return 1 + tn(phi.arg)
    if isinstance(phi, Eq):
        return 1 + tn(phi.lhs) + tn(phi.rhs)
    if isinstance(phi, SizeAtom):
        return 1 + ie(phi.lhs) + ie(phi.rhs)
    if isinstance(phi, Not):
        return 1 + formula_nodes(phi.arg)
    return 1 + sum(formula_nodes(a) for a in phi.args)
