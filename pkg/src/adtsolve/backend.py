"""Deciding quantifier-free EUF+LIA reducts.

The built-in solver does recursive case-splitting over the preserved Boolean
structure; each branch (a conjunction of literals) goes through congruence
closure, then linear integer feasibility over the congruence classes, with
disequalities split lazily into strict inequalities and functional
consistency restored by model-guided case splits.  Every sat verdict is
re-checked by an independent evaluator before being returned.

An external SMT-LIB process can be driven in batch mode as an alternative
backend; its model response is parsed back into the same IntModel shape.
"""

from __future__ import annotations

import shlex
import subprocess
from dataclasses import dataclass, field

from . import lia
from .errors import InternalError, ProtocolError, ResourceLimitError, SpawnError
from .parser import SExpr, read_sexprs
from .reduce import (
    RAnd, RApp, RConst, REq, RFalseF, RFormula, RLin, RNot, ROr, RTerm, RTrueF,
    RVar, ReducedFormula,
)

DEFAULT_BRANCH_CAP = 200000
DEFAULT_SPLIT_CAP = 20000


@dataclass
class IntModel:
    values: dict[str, int] = field(default_factory=dict)
    funcs: dict[str, dict[tuple[int, ...], int]] = field(default_factory=dict)
    defaults: dict[str, int] = field(default_factory=dict)

    def value(self, name: str) -> int:
        return self.values.get(name, 0)

    def app(self, fn: str, args: tuple[int, ...]) -> int:
        return self.funcs.get(fn, {}).get(args, self.defaults.get(fn, 0))


@dataclass
class SolverResult:
    status: str  # 'sat' | 'unsat' | 'unknown'
    model: IntModel | None = None
    reason: str | None = None

    @staticmethod
    def sat(model: IntModel) -> "SolverResult":
        return SolverResult("sat", model=model)

    @staticmethod
    def unsat() -> "SolverResult":
        return SolverResult("unsat")

    @staticmethod
    def unknown(reason: str) -> "SolverResult":
        return SolverResult("unknown", reason=reason)


# -- independent evaluator ---------------------------------------------------------

def eval_rterm(t: RTerm, model: IntModel) -> int:
    if isinstance(t, RVar):
        return model.value(t.name)
    if isinstance(t, RConst):
        return t.value
    return model.app(t.fn, tuple(eval_rterm(a, model) for a in t.args))


def eval_reduced(f: RFormula, model: IntModel) -> bool:
    if isinstance(f, RTrueF):
        return True
    if isinstance(f, RFalseF):
        return False
    if isinstance(f, REq):
        return eval_rterm(f.lhs, model) == eval_rterm(f.rhs, model)
    if isinstance(f, RNot):
        return not eval_reduced(f.arg, model)
    if isinstance(f, RLin):
        total = f.const + sum(c * eval_rterm(t, model) for c, t in f.terms)
        return {"le": total <= 0, "eq": total == 0, "ne": total != 0}[f.op]
    if isinstance(f, RAnd):
        return all(eval_reduced(a, model) for a in f.args)
    if isinstance(f, ROr):
        return any(eval_reduced(a, model) for a in f.args)
    raise AssertionError(f)


# -- congruence closure -------------------------------------------------------------

class _CC:
    def __init__(self):
        self.ids: dict[RTerm, int] = {}
        self.terms: list[RTerm] = []
        self.parent: list[int] = []
        self.uses: dict[int, list[int]] = {}
        self.const_of: dict[int, int] = {}

    def add(self, t: RTerm) -> int:
        if t in self.ids:
            return self.ids[t]
        for_args = []
        if isinstance(t, RApp):
            for_args = [self.add(a) for a in t.args]
        i = len(self.terms)
        self.ids[t] = i
        self.terms.append(t)
        self.parent.append(i)
        if isinstance(t, RConst):
            self.const_of[i] = t.value
        for a in for_args:
            self.uses.setdefault(self.find(a), []).append(i)
        return i

    def find(self, i: int) -> int:
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def _sig(self, i: int):
        t = self.terms[i]
        assert isinstance(t, RApp)
        return (t.fn, tuple(self.find(self.ids[a]) for a in t.args))

    def merge(self, i: int, j: int) -> bool:
        """Union two classes and propagate congruences; False on constant clash."""
        queue = [(i, j)]
        while queue:
            a, b = queue.pop()
            ra, rb = self.find(a), self.find(b)
            if ra == rb:
                continue
            ca, cb = self.const_of.get(ra), self.const_of.get(rb)
            if ca is not None and cb is not None and ca != cb:
                return False
            self.parent[ra] = rb
            if ca is not None:
                self.const_of[rb] = ca
            self.uses.setdefault(rb, []).extend(self.uses.pop(ra, []))
            # congruence: any two parent apps with equal signatures must merge
            table: dict = {}
            for u in self.uses.get(rb, []):
                s = self._sig(u)
                other = table.get(s)
                if other is None:
                    table[s] = u
                elif self.find(other) != self.find(u):
                    queue.append((other, u))
        return True

    def full_congruence(self) -> bool:
        """Global fixpoint pass (covers apps not sharing a merged child class)."""
        changed = True
        while changed:
            changed = False
            table: dict = {}
            for i, t in enumerate(self.terms):
                if not isinstance(t, RApp):
                    continue
                s = self._sig(i)
                other = table.get(s)
                if other is None:
                    table[s] = i
                elif self.find(other) != self.find(i):
                    if not self.merge(other, i):
                        return False
                    changed = True
        return True


# -- branch decision ------------------------------------------------------------------

class _Budget:
    def __init__(self, branches: int, splits: int):
        self.branches = branches
        self.splits = splits

    def spend_branch(self):
        self.branches -= 1
        if self.branches <= 0:
            raise ResourceLimitError("branch cap exhausted")

    def spend_split(self):
        self.splits -= 1
        if self.splits <= 0:
            raise ResourceLimitError("split cap exhausted")


def _decide_conjunction(lits: list[RFormula], budget: _Budget) -> IntModel | None:
    """Decide a conjunction of literals: congruence closure, then integer
    feasibility over the classes; violated disequalities and functional
    inconsistencies are repaired by recursive case splits on fresh literals."""
    budget.spend_split()
    cc = _CC()
    eqs: list[tuple[RTerm, RTerm]] = []
    diseqs: list[tuple[RTerm, RTerm]] = []
    lin_atoms: list[RLin] = []
    for lit in lits:
        if isinstance(lit, REq):
            cc.add(lit.lhs)
            cc.add(lit.rhs)
            eqs.append((lit.lhs, lit.rhs))
        elif isinstance(lit, RNot):
            cc.add(lit.arg.lhs)
            cc.add(lit.arg.rhs)
            diseqs.append((lit.arg.lhs, lit.arg.rhs))
        elif isinstance(lit, RLin):
            for _, t in lit.terms:
                cc.add(t)
            lin_atoms.append(lit)
        elif isinstance(lit, RTrueF):
            continue
        elif isinstance(lit, RFalseF):
            return None
        else:
            raise InternalError(f"unexpected literal {lit}")
    for a, b in eqs:
        if not cc.merge(cc.ids[a], cc.ids[b]):
            return None
    if not cc.full_congruence():
        return None
    for a, b in diseqs:
        if cc.find(cc.ids[a]) == cc.find(cc.ids[b]):
            return None

    def class_var(i: int) -> tuple[str, int | None]:
        r = cc.find(i)
        if r in cc.const_of:
            return f"#c{r}", cc.const_of[r]
        return f"#t{r}", None

    cons: list[lia.LinCon] = []
    pending_ne: list[tuple[dict[str, int], int, tuple[RTerm, RTerm] | None]] = []

    def translate(pairs, const: int) -> tuple[dict[str, int], int]:
        coeffs: dict[str, int] = {}
        c = const
        for coef, t in pairs:
            name, val = class_var(cc.ids[t])
            if val is not None:
                c += coef * val
            else:
                coeffs[name] = coeffs.get(name, 0) + coef
        return coeffs, c

    for atom in lin_atoms:
        coeffs, c = translate(atom.terms, atom.const)
        if atom.op == "ne":
            if not coeffs:
                if c == 0:
                    return None
                continue
            pending_ne.append((coeffs, c, _ne_witness(atom)))
        else:
            cons.append(lia.con(atom.op, coeffs, c))
    for a, b in diseqs:
        coeffs, c = translate([(1, a), (-1, b)], 0)
        if not coeffs:
            if c == 0:
                return None  # cannot happen: classes differ, but both constant
            continue
        pending_ne.append((coeffs, c, (a, b)))

    model_map = lia.solve(cons)
    if model_map is None:
        return None

    # unconstrained classes take distinct values clear of the solved ones, so
    # that they neither collide in function tables nor violate disequalities
    spread_base = 1 + max((abs(v) for v in model_map.values()), default=0)
    class_values: dict[str, int] = {}
    for i in range(len(cc.terms)):
        r = cc.find(i)
        name, v = class_var(r)
        if name in class_values:
            continue
        if v is not None:
            class_values[name] = v
        elif name in model_map:
            class_values[name] = model_map[name]
        else:
            class_values[name] = spread_base
            spread_base += 1

    def val_of_class(i: int) -> int:
        name, _ = class_var(i)
        return class_values[name]

    # lazily split the first disequality the candidate model violates
    for coeffs, c, witness in pending_ne:
        total = c + sum(a * class_values[v] for v, a in coeffs.items())
        if total != 0:
            continue
        budget.spend_split()
        if witness is not None:
            a, b = witness
            split = [RLin("le", ((1, a), (-1, b)), 1), RLin("le", ((-1, a), (1, b)), 1)]
        else:
            split = []  # general ne atom: strengthen both ways on its terms
        if not split:
            # rebuild the two strict sides of the original linear atom
            return _split_general_ne(lits, coeffs, c, cc, budget)
        for extra in split:
            out = _decide_conjunction(lits + [extra], budget)
            if out is not None:
                return out
        return None

    # functional consistency under the candidate model
    conflict = _functional_conflict(cc, val_of_class)
    if conflict is None:
        return _extract_model(cc, val_of_class)
    budget.spend_split()
    t1, t2 = conflict
    out = _decide_conjunction(lits + [REq(t1, t2)], budget)
    if out is not None:
        return out
    assert isinstance(t1, RApp) and isinstance(t2, RApp)
    for a1, a2 in zip(t1.args, t2.args):
        if cc.find(cc.ids[a1]) == cc.find(cc.ids[a2]):
            continue
        out = _decide_conjunction(lits + [RNot(REq(a1, a2))], budget)
        if out is not None:
            return out
    return None


def _ne_witness(atom: RLin) -> tuple[RTerm, RTerm] | None:
    """For a two-sided unit ne atom, the pair of terms it separates."""
    if len(atom.terms) == 2 and atom.const == 0:
        (c1, t1), (c2, t2) = atom.terms
        if c1 == 1 and c2 == -1:
            return t1, t2
        if c1 == -1 and c2 == 1:
            return t2, t1
    return None


def _split_general_ne(lits, coeffs, c, cc, budget) -> IntModel | None:
    """Split sum(coeffs) + c != 0 into < and > over the original literal set by
    re-expressing the class variables through representative terms."""
    rep_term: dict[str, RTerm] = {}
    for i, t in enumerate(cc.terms):
        name, val = (f"#t{cc.find(i)}", None) if cc.find(i) not in cc.const_of \
            else (None, None)
        if name and name not in rep_term:
            rep_term[name] = t
    for sign in (1, -1):
        pairs = tuple((sign * a, rep_term[v]) for v, a in coeffs.items())
        extra = RLin("le", pairs, sign * c + 1)
        out = _decide_conjunction(lits + [extra], budget)
        if out is not None:
            return out
    return None


def _functional_conflict(cc: _CC, val_of_class) -> tuple[RTerm, RTerm] | None:
    tables: dict[str, dict[tuple[int, ...], int]] = {}
    reps: dict[tuple[str, tuple[int, ...]], RTerm] = {}
    for i, t in enumerate(cc.terms):
        if not isinstance(t, RApp):
            continue
        key = tuple(val_of_class(cc.ids[a]) for a in t.args)
        table = tables.setdefault(t.fn, {})
        existing = table.get(key)
        if existing is None:
            table[key] = val_of_class(i)
            reps[(t.fn, key)] = t
        elif existing != val_of_class(i):
            return reps[(t.fn, key)], t
    return None


def _extract_model(cc: _CC, val_of_class) -> IntModel:
    model = IntModel()
    for i, t in enumerate(cc.terms):
        if isinstance(t, RVar):
            model.values[t.name] = val_of_class(i)
        elif isinstance(t, RApp):
            args = tuple(val_of_class(cc.ids[a]) for a in t.args)
            model.funcs.setdefault(t.fn, {})[args] = val_of_class(i)
    return model


# -- public solve ------------------------------------------------------------------------

def solve(reduct: ReducedFormula, *, branch_cap: int = DEFAULT_BRANCH_CAP,
          split_cap: int = DEFAULT_SPLIT_CAP) -> SolverResult:
    budget = _Budget(branch_cap, split_cap)
    try:
        model = _search([reduct.formula], [], budget)
    except ResourceLimitError as e:
        return SolverResult.unknown(str(e))
    if model is None:
        return SolverResult.unsat()
    # values for declared variables that no literal mentioned
    for name in reduct.table.int_vars:
        model.values.setdefault(name, 0)
    if not eval_reduced(reduct.formula, model):
        raise InternalError("solver produced a model that fails re-evaluation")
    return SolverResult.sat(model)


def _search(pending: list[RFormula], lits: list[RFormula], budget: _Budget):
    """DFS over the Boolean structure.  All definite conjuncts are absorbed
    before branching, and a branch is pruned as soon as its definite part is
    already inconsistent."""
    from collections import deque

    queue = deque(pending)
    lits = list(lits)
    ors: list[ROr] = []
    while queue:
        f = queue.popleft()
        if isinstance(f, RTrueF):
            continue
        if isinstance(f, RFalseF):
            return None
        if isinstance(f, RAnd):
            queue.extendleft(reversed(f.args))
        elif isinstance(f, ROr):
            ors.append(f)
        else:
            lits.append(f)
    if not ors:
        return _decide_conjunction(lits, budget)
    if _decide_conjunction(lits, budget) is None:
        return None
    first, rest = ors[0], ors[1:]
    budget.spend_branch()
    for arm in first.args:
        out = _search([arm] + rest, lits, budget)
        if out is not None:
            return out
    return None


# -- SMT-LIB emission ----------------------------------------------------------------------

def _rterm_text(t: RTerm) -> str:
    if isinstance(t, RVar):
        return t.name
    if isinstance(t, RConst):
        return str(t.value) if t.value >= 0 else f"(- {-t.value})"
    if not t.args:
        return t.fn
    return "(" + " ".join([t.fn] + [_rterm_text(a) for a in t.args]) + ")"


def _rlin_text(f: RLin) -> str:
    parts = []
    for c, t in f.terms:
        if c == 1:
            parts.append(_rterm_text(t))
        else:
            parts.append(f"(* {c} {_rterm_text(t)})")
    if f.const != 0 or not parts:
        parts.append(str(f.const) if f.const >= 0 else f"(- {-f.const})")
    lhs = parts[0] if len(parts) == 1 else "(+ " + " ".join(parts) + ")"
    if f.op == "le":
        return f"(<= {lhs} 0)"
    if f.op == "eq":
        return f"(= {lhs} 0)"
    return f"(not (= {lhs} 0))"


def rformula_text(f: RFormula) -> str:
    if isinstance(f, RTrueF):
        return "true"
    if isinstance(f, RFalseF):
        return "false"
    if isinstance(f, REq):
        return f"(= {_rterm_text(f.lhs)} {_rterm_text(f.rhs)})"
    if isinstance(f, RNot):
        return f"(not {rformula_text(f.arg)})"
    if isinstance(f, RLin):
        return _rlin_text(f)
    op = "and" if isinstance(f, RAnd) else "or"
    return f"({op} " + " ".join(rformula_text(a) for a in f.args) + ")"


def emit_smtlib(reduct: ReducedFormula, *, get_model: bool = True,
                logic: str = "QF_UFLIA") -> str:
    lines = [f"(set-logic {logic})"]
    for name in reduct.table.int_vars:
        lines.append(f"(declare-fun {name} () Int)")
    for name, (arity, _) in reduct.table.funs.items():
        args = " ".join(["Int"] * arity)
        lines.append(f"(declare-fun {name} ({args}) Int)")
    lines.append(f"(assert {rformula_text(reduct.formula)})")
    lines.append("(check-sat)")
    if get_model:
        lines.append("(get-model)")
    return "\n".join(lines) + "\n"


# -- external backend ------------------------------------------------------------------------

def solve_external(reduct: ReducedFormula, cmd: str, *,
                   timeout: float = 30.0) -> SolverResult:
    script = emit_smtlib(reduct)
    try:
        proc = subprocess.run(shlex.split(cmd), input=script, text=True,
                              capture_output=True, timeout=timeout)
    except FileNotFoundError as e:
        raise SpawnError(f"cannot launch external solver: {e}") from e
    except subprocess.TimeoutExpired:
        return SolverResult.unknown("external solver timeout")
    out = proc.stdout.strip()
    if not out:
        raise ProtocolError("external solver produced no output", raw=proc.stderr)
    lines = out.splitlines()
    verdict = lines[0].strip()
    if verdict == "unsat":
        return SolverResult.unsat()
    if verdict == "unknown":
        return SolverResult.unknown("external solver returned unknown")
    if verdict != "sat":
        raise ProtocolError(f"unexpected solver verdict {verdict!r}", raw=out)
    body = "\n".join(lines[1:])
    model = parse_model_response(body) if body.strip() else IntModel()
    return SolverResult.sat(model)


def parse_model_response(text: str) -> IntModel:
    """Parse a get-model response: a (model ...) or bare (...) list of define-funs."""
    try:
        exprs = read_sexprs(text)
    except Exception as e:
        raise ProtocolError(f"unparseable model response: {e}", raw=text) from e
    model = IntModel()
    items: list[SExpr] = []
    for e in exprs:
        if e.items is None:
            continue
        seq = list(e.items)
        if seq and seq[0].is_atom and seq[0].value == "model":
            seq = seq[1:]
        items.extend(seq)
    for d in items:
        if d.items is None or len(d.items) < 5 or d.items[0].value != "define-fun":
            continue
        name = d.items[1].value
        params = d.items[2]
        body = d.items[4]
        if params.items is None:
            continue
        if not params.items:
            model.values[name] = _parse_int_value(body, text)
        else:
            arg_names = [p.items[0].value for p in params.items]
            graph: dict[tuple[int, ...], int] = {}
            default = _parse_ite_graph(body, arg_names, graph, text)
            model.funcs[name] = graph
            model.defaults[name] = default
    return model


def _parse_int_value(e: SExpr, raw: str) -> int:
    if e.is_atom:
        try:
            return int(e.value)
        except ValueError as err:
            raise ProtocolError(f"expected integer, got {e.value!r}", raw=raw) from err
    if (e.items and len(e.items) == 2 and e.items[0].value == "-"):
        return -_parse_int_value(e.items[1], raw)
    raise ProtocolError(f"expected integer value, got {e}", raw=raw)


def _parse_ite_graph(e: SExpr, arg_names: list[str], graph: dict, raw: str) -> int:
    """Fold a nested (ite (and (= x v) ...) r else) body into a finite graph."""
    if e.items is not None and e.items and e.items[0].value == "ite":
        cond, then, rest = e.items[1], e.items[2], e.items[3]
        key = _parse_cond(cond, arg_names, raw)
        graph[key] = _parse_int_value(then, raw)
        return _parse_ite_graph(rest, arg_names, graph, raw)
    return _parse_int_value(e, raw)


def _parse_cond(e: SExpr, arg_names: list[str], raw: str) -> tuple[int, ...]:
    eqs: dict[str, int] = {}

    def eat_eq(x: SExpr):
        if x.items is None or len(x.items) != 3 or x.items[0].value != "=":
            raise ProtocolError(f"unexpected model condition {x}", raw=raw)
        a, b = x.items[1], x.items[2]
        if a.is_atom and a.value in arg_names:
            eqs[a.value] = _parse_int_value(b, raw)
        elif b.is_atom and b.value in arg_names:
            eqs[b.value] = _parse_int_value(a, raw)
        else:
            raise ProtocolError(f"unexpected model condition {x}", raw=raw)

    if e.items is not None and e.items and e.items[0].value == "and":
        for x in e.items[1:]:
            eat_eq(x)
    else:
        eat_eq(e)
    try:
        return tuple(eqs[n] for n in arg_names)
    except KeyError as err:
        raise ProtocolError(f"incomplete model condition {e}", raw=raw) from err


# -- simplification-trace replay ---------------------------------------------------------------

def complete_model(reduct: ReducedFormula, model: IntModel) -> IntModel:
    """Extend a model of a simplified reduct to one of the original reduct by
    replaying the simplification trace newest-first."""
    out = IntModel(dict(model.values), {k: dict(v) for k, v in model.funcs.items()},
                   dict(model.defaults))
    for step in reversed(reduct.trace):
        kind, var, payload = step
        if kind == "subst":
            out.values[var] = eval_rterm(payload, out)
        else:  # dropped literal: choose any value satisfying it
            out.values[var] = _solve_dropped(payload, var, out)
    return out


def _solve_dropped(lit: RFormula, var: str, model: IntModel) -> int:
    def value_of(t: RTerm) -> int:
        return eval_rterm(t, model)

    if isinstance(lit, REq):
        other = lit.rhs if isinstance(lit.lhs, RVar) and lit.lhs.name == var else lit.lhs
        return value_of(other)
    if isinstance(lit, RNot):
        eq = lit.arg
        other = eq.rhs if isinstance(eq.lhs, RVar) and eq.lhs.name == var else eq.lhs
        return value_of(other) + 1
    if isinstance(lit, RLin):
        coeff = 0
        rest = lit.const
        for c, t in lit.terms:
            if isinstance(t, RVar) and t.name == var:
                coeff += c
            else:
                rest += c * value_of(t)
        if coeff == 0:
            return 0
        if lit.op == "eq":
            return -rest // coeff
        if lit.op == "ne":
            return 0 if rest != 0 else 1
        # le: coeff*v + rest <= 0; pick the bound value
        if coeff > 0:
            return (-rest) // coeff          # floor(-rest/coeff)
        return -((-rest) // (-coeff))        # ceil(rest/(-coeff))
    raise InternalError(f"cannot solve dropped literal {lit}")
