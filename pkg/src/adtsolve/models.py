"""Turning EUF+LIA models of reducts into genuine ADT models, and checking them.

Reconstruction follows the constructive argument: collect the (value, sort)
pairs constrained by constructor/selector/tester literals of the satisfied
branch, read each pair's head symbol and children off the ctorId and selector
function graphs, then build terms bottom-up; remaining pairs receive fresh
terms of minimal size never used before, which keeps the map injective so
that disequalities stay satisfied.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .backend import IntModel, complete_model, eval_reduced
from .errors import InternalError, UnboundVariableError
from .reduce import ReducedFormula, _guard_vars
from .semantics import evaluate, print_formula
from .signature import Signature, cardinality, ctor_at, fresh_terms
from .terms import (
    AdtModel, And, Ctor, Eq, FalseF, Formula, Not, Or, Sel, SizeAtom, Term,
    Tester, TrueF, Var, free_vars, ground_size,
)


@dataclass
class ReconstructionStats:
    case2_pairs: list[tuple[int, str]] = field(default_factory=list)
    case3_pairs: list[tuple[int, str]] = field(default_factory=list)
    injectivity_checks: int = 0


def satisfied_branch_literals(reduct: ReducedFormula, model: IntModel) -> list[Formula]:
    """Flat literals of the disjunctive branch the model satisfies, resolved
    through the literal map the reducer recorded."""
    out: list[Formula] = []
    opts = reduct.opts

    def lookup(lit: Formula, guards: frozenset[str]) -> object:
        guarded = (opts.guarded_opt and isinstance(lit, Eq)
                   and isinstance(lit.lhs, Sel) and isinstance(lit.lhs.arg, Var)
                   and lit.lhs.arg.name in guards)
        try:
            return reduct.literal_map[(lit, guarded)]
        except KeyError as e:
            raise InternalError(f"literal missing from reduction map: {lit}") from e

    def satisfied(f: Formula, guards: frozenset[str]) -> bool:
        if isinstance(f, TrueF):
            return True
        if isinstance(f, FalseF):
            return False
        if isinstance(f, And):
            local = set(guards)
            for child in f.args:
                local.update(_guard_vars(child))
            g = frozenset(local)
            return all(satisfied(a, g) for a in f.args)
        if isinstance(f, Or):
            return any(satisfied(a, guards) for a in f.args)
        extra = guards | frozenset(_guard_vars(f))
        return eval_reduced(lookup(f, extra), model)

    def walk(f: Formula, guards: frozenset[str]):
        if isinstance(f, (TrueF, FalseF)):
            return
        if isinstance(f, And):
            local = set(guards)
            for child in f.args:
                local.update(_guard_vars(child))
            g = frozenset(local)
            for a in f.args:
                walk(a, g)
            return
        if isinstance(f, Or):
            for a in f.args:
                if satisfied(a, guards):
                    walk(a, guards)
                    return
            raise InternalError("no satisfied disjunct in a sat model")
        out.append(f)

    walk(reduct.flat.formula, frozenset())
    return out


def reconstruct(reduct: ReducedFormula, int_model: IntModel,
                stats: ReconstructionStats | None = None, *,
                precompleted: bool = False) -> AdtModel:
    """Build an ADT model from a satisfying integer model of the reduct."""
    base = reduct.base or reduct
    if precompleted or not reduct.trace:
        model = int_model
    else:
        model = complete_model(reduct, int_model)
    if not eval_reduced(base.formula, model):
        raise InternalError("completed model does not satisfy the unsimplified reduct")
    sig = reduct.sig
    table = base.table
    flat = base.flat
    stats = stats if stats is not None else ReconstructionStats()
    enum_sorts = table.enum_sorts

    def beta(name: str) -> int:
        return model.value(name)

    lits = satisfied_branch_literals(base, model)

    # D: pairs constrained by constructor / selector / tester literals
    d_pairs: dict[tuple[int, str], None] = {}

    def note(name: str, sort: str):
        if sort not in enum_sorts:
            d_pairs.setdefault((beta(name), sort))

    for lit in lits:
        core = lit.arg if isinstance(lit, Not) else lit
        if isinstance(core, Tester) and isinstance(core.arg, Var):
            note(core.arg.name, core.arg.sort)
        elif isinstance(core, Eq):
            lhs, rhs = core.lhs, core.rhs
            if isinstance(lhs, Ctor) and isinstance(rhs, Var):
                note(rhs.name, rhs.sort)
            elif isinstance(lhs, Sel) and isinstance(lhs.arg, Var):
                note(lhs.arg.name, lhs.arg.sort)

    # dep: head symbol and children read off the totalized function graphs
    dep: dict[tuple[int, str], tuple[str, list[tuple[int, str]]]] = {}
    for (a, sort) in d_pairs:
        cid = model.app(table.ctorid_fun(sort), (a,))
        if not (0 <= cid < len(sig.ctors_of(sort))):
            continue  # untouched integer: fall through to case 3
        decl = ctor_at(sig, sort, cid)
        children = []
        for j, (_, arg_sort) in enumerate(decl.args):
            cj = model.app(table.sel_fun(decl.name, j), (a,))
            children.append((cj, arg_sort))
        dep[(a, sort)] = (decl.name, children)

    # P = D plus dependent pairs plus the pairs of all remaining variables
    pairs: dict[tuple[int, str], None] = dict(d_pairs)
    for _, children in dep.values():
        for (c, s) in children:
            if s not in enum_sorts:
                pairs.setdefault((c, s))
    for name, sort in flat.var_sorts.items():
        if sort not in enum_sorts:
            pairs.setdefault((beta(name), sort))

    gamma: dict[tuple[int, str], Term] = {}
    used: dict[str, set[Term]] = {}

    def fixed_enum_term(value: int, sort: str) -> Term:
        n = cardinality(sig, sort).count
        if n is None or not (0 <= value < n):
            raise InternalError(f"enum value {value} outside range of {sort}")
        return Ctor(ctor_at(sig, sort, value).name, ())

    def gamma_term(pair: tuple[int, str]) -> Term:
        if pair[1] in enum_sorts:
            return fixed_enum_term(*pair)
        return gamma[pair]

    def assign(p: tuple[int, str], t: Term):
        stats.injectivity_checks += 1
        if t in used.setdefault(p[1], set()):
            raise InternalError("injectivity violated during reconstruction")
        used[p[1]].add(t)
        gamma[p] = t

    remaining = set(pairs)
    while remaining:
        progressed = False
        # case 2: a dependency-complete pair builds its term bottom-up
        for p in sorted(remaining, key=lambda q: (q[1], q[0])):
            if p in dep:
                head, children = dep[p]
                if all(c[1] in enum_sorts or c in gamma for c in children):
                    assign(p, Ctor(head, tuple(gamma_term(c) for c in children)))
                    stats.case2_pairs.append(p)
                    remaining.discard(p)
                    progressed = True
                    break
        if progressed:
            continue
        # case 3: give some unconstrained pair a fresh minimal term
        candidates = [p for p in remaining if p not in dep]
        if not candidates:
            raise InternalError("cyclic dependency in model reconstruction")
        best = None
        for p in sorted(candidates, key=lambda q: (q[1], q[0])):
            t = _next_fresh(sig, p[1], used)
            key = (ground_size(t), p[1], p[0])
            if best is None or key < best[0]:
                best = (key, p, t)
        _, p, t = best
        assign(p, t)
        stats.case3_pairs.append(p)
        remaining.discard(p)

    adt: dict[str, Term] = {}
    for name, sort in flat.var_sorts.items():
        adt[name] = gamma_term((beta(name), sort))
    ints = {name: model.value(name) for name in sorted(flat.int_vars)}

    # selector interpretation choices for wrong-headed applications
    overrides: dict[tuple[str, int, Term], Term] = {}
    for fname, (_, origin) in table.funs.items():
        if origin[0] != "sel":
            continue
        _, ctor_name, j = origin
        decl = sig.ctor(ctor_name)
        target_sort = decl.args[j][1]
        for args, val in model.funcs.get(fname, {}).items():
            src_pair = (args[0], decl.sort)
            tgt_pair = (val, target_sort)
            if decl.sort in enum_sorts or (src_pair not in gamma):
                continue
            if target_sort not in enum_sorts and tgt_pair not in gamma:
                continue
            src = gamma[src_pair]
            if isinstance(src, Ctor) and src.ctor != ctor_name:
                overrides[(ctor_name, j, src)] = gamma_term(tgt_pair)
    return AdtModel(adt, ints, overrides)


def _next_fresh(sig: Signature, sort: str, used: dict[str, set[Term]]) -> Term:
    """Smallest term of the sort not yet in the gamma range (peek only)."""
    taken = used.setdefault(sort, set())
    for t in fresh_terms(sig, sort):
        if t not in taken:
            return t
    raise InternalError("exhausted term enumeration")


def check_model(sig: Signature, model: AdtModel, phi: Formula) -> tuple[bool, str | None]:
    """Evaluate; on failure name the first falsified literal."""
    fv = free_vars(phi)
    for v in fv.adt:
        if v.name not in model.adt:
            raise UnboundVariableError(v.name)
    for n in fv.ints:
        if n not in model.ints:
            raise UnboundVariableError(n)
    if evaluate(sig, model, phi):
        return True, None
    return False, _first_falsified(sig, model, phi)


def _first_falsified(sig: Signature, model: AdtModel, phi: Formula) -> str:
    if isinstance(phi, And):
        for a in phi.args:
            if not evaluate(sig, model, a):
                return _first_falsified(sig, model, a)
    if isinstance(phi, Or):
        return _first_falsified(sig, model, phi.args[0])
    if isinstance(phi, Not) and not isinstance(phi.arg, (Tester, Eq, SizeAtom)):
        return _first_falsified(sig, model, phi.arg)
    return print_formula(sig, phi)
