"""Craig interpolation for ADT formulas via reduction.

Both sides of an interpolation problem are reduced in size mode against a
shared symbol table (size mode keeps the reduced vocabulary back-translatable:
the size functions map to the term-size operator, where depth functions would
have no ADT counterpart).  An EUF+LIA interpolant obtained from an external
solver is translated back to the ADT vocabulary and verified against both
implications before being returned.
"""

from __future__ import annotations

from dataclasses import dataclass
import shlex
import subprocess

from .backend import rformula_text
from .errors import (
    BackendUnsupportedError, InternalError, ProtocolError, SpawnError,
    UntranslatableError,
)
from .normalize import flatten, to_nnf
from .parser import SExpr, read_sexprs
from .reduce import (
    RAnd, RApp, RConst, REq, RFormula, RLin, RNot, ROr, RTRUE, RFALSE, RTerm,
    RTrueF, RFalseF, RVar, ReduceOptions, ReducedFormula, SymbolTable, SIZE_MODE,
    rand, reduce_partitions, ror,
)
from .signature import Signature, ensure_valid
from .sizesolve import DEFAULT_FUEL, make_state, run_loop
from .terms import (
    AdtModel, And, Ctor, Eq, Formula, IntAdd, IntConst, IntExpr, IntMul, IntVar,
    Not, Sel, SizeAtom, SizeOf, Term, TRUE, FALSE, Tester, Var, conj, disj,
    free_vars,
)


@dataclass
class InterpolationProblem:
    a: Formula
    b: Formula
    sig: Signature

    def shared_vars(self) -> tuple[frozenset[Var], frozenset[str]]:
        fa, fb = free_vars(self.a), free_vars(self.b)
        return fa.adt & fb.adt, fa.ints & fb.ints


@dataclass
class InterpolatingBackend:
    cmd: str
    dialect: str = "smtinterpol"  # or 'cvc5'
    timeout: float = 60.0


@dataclass
class InterpolationOutcome:
    kind: str  # 'interpolant' | 'not-unsat' | 'untranslatable' | 'unknown'
    interpolant: Formula | None = None
    model: AdtModel | None = None
    raw: str = ""
    diagnosis: str = ""


def interpolate(prob: InterpolationProblem, backend: InterpolatingBackend,
                fuel: int = DEFAULT_FUEL,
                opts: ReduceOptions = ReduceOptions()) -> InterpolationOutcome:
    """Full pipeline: joint satisfiability check, partitioned reduction,
    external interpolant, back-translation, self-verification."""
    sig = prob.sig
    ensure_valid(sig)
    flat_a = flatten(to_nnf(prob.a), sig, prefix="_ta")
    flat_b = flatten(to_nnf(prob.b), sig, prefix="_tb")
    state = make_state(flat_a, sig, fuel=fuel, partition="A")
    state.conjuncts.append(("B", flat_b.formula))
    for name, sort in flat_b.var_sorts.items():
        # shared variables stay attributed to partition A
        if name not in state.var_sorts:
            state.var_sorts[name] = sort
            state.var_partition[name] = "B"
            state.creation_order.append(name)
    state.int_vars.update(flat_b.int_vars)
    state.registry.update(flat_b.registry)
    joint = run_loop(state, opts=opts)
    if joint.status == "sat":
        return InterpolationOutcome("not-unsat", model=joint.model)
    if joint.status == "unknown":
        return InterpolationOutcome("unknown", diagnosis=joint.diagnosis.text)

    part_a, part_b = _partition_reducts(state, sig, opts)
    raw = _query_interpolant(part_a, part_b, backend)
    try:
        reduced_i = parse_reduced(raw, part_a.table)
        interpolant = back_translate(reduced_i, part_a.table)
    except UntranslatableError as e:
        return InterpolationOutcome("untranslatable", raw=e.raw or raw,
                                    diagnosis=str(e))
    if not validate_interpolant(interpolant, prob, fuel=fuel):
        raise InternalError("backend interpolant failed verification: "
                            f"{raw}")
    return InterpolationOutcome("interpolant", interpolant=interpolant, raw=raw)


def _partition_reducts(state, sig, opts) -> tuple[ReducedFormula, ReducedFormula]:
    from .normalize import FlatFormula

    def part(tag: str) -> FlatFormula:
        formula = conj([f for t, f in state.conjuncts if t == tag])
        fv = free_vars(formula)
        var_sorts = {n: state.var_sorts[n]
                     for n in state.var_sorts
                     if any(v.name == n for v in fv.adt)}
        return FlatFormula(formula=formula, registry=state.registry,
                           var_sorts=var_sorts,
                           int_vars={n for n in fv.ints})

    ra, rb = reduce_partitions([("A", part("A")), ("B", part("B"))], sig,
                               SIZE_MODE, opts)
    return ra, rb


# -- external interpolating backends -----------------------------------------------------

def _declarations(table: SymbolTable) -> list[str]:
    lines = []
    for name in table.int_vars:
        lines.append(f"(declare-fun {name} () Int)")
    for name, (arity, _) in table.funs.items():
        args = " ".join(["Int"] * arity)
        lines.append(f"(declare-fun {name} ({args}) Int)")
    return lines


def interpolation_script(part_a: ReducedFormula, part_b: ReducedFormula,
                         dialect: str) -> str:
    decls = _declarations(part_a.table)
    a_text = rformula_text(part_a.formula)
    b_text = rformula_text(part_b.formula)
    if dialect == "smtinterpol":
        lines = ["(set-option :produce-interpolants true)", "(set-logic QF_UFLIA)"]
        lines += decls
        lines.append(f"(assert (! {a_text} :named partA))")
        lines.append(f"(assert (! {b_text} :named partB))")
        lines.append("(check-sat)")
        lines.append("(get-interpolants partA partB)")
    elif dialect == "cvc5":
        lines = ["(set-logic QF_UFLIA)", "(set-option :produce-interpolants true)"]
        lines += decls
        lines.append(f"(assert {a_text})")
        lines.append(f"(get-interpolant itp (not {b_text}))")
    else:
        raise BackendUnsupportedError(f"unknown interpolation dialect {dialect!r}")
    return "\n".join(lines) + "\n"


def _query_interpolant(part_a: ReducedFormula, part_b: ReducedFormula,
                       backend: InterpolatingBackend) -> str:
    script = interpolation_script(part_a, part_b, backend.dialect)
    try:
        proc = subprocess.run(shlex.split(backend.cmd), input=script, text=True,
                              capture_output=True, timeout=backend.timeout)
    except FileNotFoundError as e:
        raise SpawnError(f"cannot launch interpolating solver: {e}") from e
    except subprocess.TimeoutExpired as e:
        raise ProtocolError("interpolating solver timeout") from e
    out = proc.stdout.strip()
    if not out:
        raise ProtocolError("interpolating solver produced no output",
                            raw=proc.stderr)
    if backend.dialect == "smtinterpol":
        lines = out.splitlines()
        if lines[0].strip() != "unsat":
            raise ProtocolError(f"expected unsat, got {lines[0]!r}", raw=out)
        body = "\n".join(lines[1:]).strip()
        exprs = read_sexprs(body)
        if not exprs or exprs[0].items is None or not exprs[0].items:
            raise ProtocolError("no interpolant in response", raw=out)
        return str(exprs[0].items[0])
    # cvc5: (define-fun itp () Bool <term>)
    exprs = read_sexprs(out)
    for e in exprs:
        if e.items and e.items[0].value == "define-fun":
            return str(e.items[4])
    raise ProtocolError("no define-fun in interpolant response", raw=out)


# -- parsing reduced-vocabulary formulas ---------------------------------------------------

_CMP_OPS = {"<=", "<", ">=", ">"}


def parse_reduced(text: str, table: SymbolTable) -> RFormula:
    """Parse an SMT-LIB Boolean term over the reduced vocabulary."""
    exprs = read_sexprs(text)
    if len(exprs) != 1:
        raise ProtocolError("expected a single interpolant term", raw=text)
    return _parse_rformula(exprs[0], table, {})


def _parse_rformula(e: SExpr, table: SymbolTable, lets: dict[str, SExpr]) -> RFormula:
    if e.is_atom:
        if e.value in lets:
            return _parse_rformula(lets[e.value], table, lets)
        if e.value == "true":
            return RTRUE
        if e.value == "false":
            return RFALSE
        raise UntranslatableError(f"unexpected atom {e.value!r}", raw=str(e))
    head = e.items[0].value if e.items and e.items[0].is_atom else None
    if head == "let":
        new_lets = dict(lets)
        for binding in e.items[1].items:
            new_lets[binding.items[0].value] = _substitute_lets(binding.items[1], lets)
        return _parse_rformula(e.items[2], table, new_lets)
    if head == "and":
        return rand([_parse_rformula(x, table, lets) for x in e.items[1:]])
    if head == "or":
        return ror([_parse_rformula(x, table, lets) for x in e.items[1:]])
    if head == "not":
        inner = _parse_rformula(e.items[1], table, lets)
        return _negate_r(inner)
    if head == "=>":
        parts = [_parse_rformula(x, table, lets) for x in e.items[1:]]
        out = parts[-1]
        for p in reversed(parts[:-1]):
            out = ror([_negate_r(p), out])
        return out
    if head in ("=", "distinct"):
        sides = [_parse_rterm_or_linear(x, table, lets) for x in e.items[1:]]
        pairs = list(zip(sides, sides[1:])) if head == "=" else [
            (a, b) for i, a in enumerate(sides) for b in sides[i + 1:]]
        out = []
        for a, b in pairs:
            if isinstance(a, tuple) or isinstance(b, tuple):
                la, ca = a if isinstance(a, tuple) else (((1, a),), 0)
                lb, cb = b if isinstance(b, tuple) else (((1, b),), 0)
                terms = list(la) + [(-c, t) for c, t in lb]
                from .reduce import lin
                out.append(lin("eq" if head == "=" else "ne", terms, ca - cb))
            else:
                out.append(REq(a, b) if head == "=" else RNot(REq(a, b)))
        return rand(out)
    if head in _CMP_OPS:
        sides = [_as_linear(_parse_rterm_or_linear(x, table, lets)) for x in e.items[1:]]
        from .reduce import lin
        atoms = []
        for (la, ca), (lb, cb) in zip(sides, sides[1:]):
            terms = list(la) + [(-c, t) for c, t in lb]
            const = ca - cb
            if head == "<=":
                atoms.append(lin("le", terms, const))
            elif head == "<":
                atoms.append(lin("le", terms, const + 1))
            elif head == ">=":
                atoms.append(lin("le", [(-c, t) for c, t in terms], -const))
            else:
                atoms.append(lin("le", [(-c, t) for c, t in terms], -const + 1))
        return rand(atoms)
    raise UntranslatableError(f"unsupported interpolant construct {head!r}", raw=str(e))


def _negate_r(f: RFormula) -> RFormula:
    if isinstance(f, RTrueF):
        return RFALSE
    if isinstance(f, RFalseF):
        return RTRUE
    if isinstance(f, REq):
        return RNot(f)
    if isinstance(f, RNot):
        return f.arg
    if isinstance(f, RLin):
        if f.op == "eq":
            return RLin("ne", f.terms, f.const)
        if f.op == "ne":
            return RLin("eq", f.terms, f.const)
        # not(sum + c <= 0)  ==  -sum - c + 1 <= 0
        return RLin("le", tuple((-c, t) for c, t in f.terms), -f.const + 1)
    if isinstance(f, RAnd):
        return ror([_negate_r(a) for a in f.args])
    if isinstance(f, ROr):
        return rand([_negate_r(a) for a in f.args])
    raise InternalError(f"cannot negate {f}")


def _substitute_lets(e: SExpr, lets: dict[str, SExpr]) -> SExpr:
    if e.is_atom:
        return lets.get(e.value, e)
    return SExpr(e.line, e.col,
                 items=tuple(_substitute_lets(x, lets) for x in e.items))


def _parse_rterm_or_linear(e: SExpr, table: SymbolTable, lets: dict[str, SExpr]):
    """Returns an RTerm, or (terms, const) for compound linear expressions."""
    if e.is_atom:
        if e.value in lets:
            return _parse_rterm_or_linear(lets[e.value], table, lets)
        v = e.value
        if v.isdigit() or (v.startswith("-") and v[1:].isdigit()):
            return RConst(int(v))
        if v in table.funs and table.funs[v][0] == 0:
            return RApp(v, ())  # nullary constructor function
        return RVar(v)
    head = e.items[0].value if e.items[0].is_atom else None
    if head == "-" and len(e.items) == 2:
        inner = _as_linear(_parse_rterm_or_linear(e.items[1], table, lets))
        return tuple([tuple((-c, t) for c, t in inner[0]), -inner[1]])
    if head in ("+", "-"):
        sides = [_as_linear(_parse_rterm_or_linear(x, table, lets)) for x in e.items[1:]]
        terms: list[tuple[int, RTerm]] = list(sides[0][0])
        const = sides[0][1]
        for lt, lc in sides[1:]:
            sign = 1 if head == "+" else -1
            terms.extend((sign * c, t) for c, t in lt)
            const += sign * lc
        return tuple([tuple(terms), const])
    if head == "*":
        sides = [_parse_rterm_or_linear(x, table, lets) for x in e.items[1:]]
        consts = [s for s in sides if isinstance(s, RConst)]
        if len(consts) != 1 or len(sides) != 2:
            raise UntranslatableError("nonlinear interpolant term", raw=str(e))
        other = sides[0] if sides[1] is consts[0] else sides[1]
        lt, lc = _as_linear(other)
        k = consts[0].value
        return tuple([tuple((k * c, t) for c, t in lt), k * lc])
    if head is not None and head in table.funs:
        args = []
        for x in e.items[1:]:
            sub = _parse_rterm_or_linear(x, table, lets)
            if isinstance(sub, tuple):
                raise UntranslatableError("compound argument to uninterpreted "
                                          "function", raw=str(e))
            args.append(sub)
        return RApp(head, tuple(args))
    raise UntranslatableError(f"unsupported term {e}", raw=str(e))


def _as_linear(x) -> tuple[tuple[tuple[int, RTerm], ...], int]:
    if isinstance(x, tuple):
        return x
    if isinstance(x, RConst):
        return ((), x.value)
    return (((1, x),), 0)


# -- back-translation -------------------------------------------------------------------------

def back_translate(phi: RFormula, table: SymbolTable) -> Formula:
    """Map a reduced-vocabulary formula back to the ADT language; raises
    UntranslatableError for depth functions, arithmetic on ADT variables of
    non-enumeration sorts, or head indices outside the constructor range."""
    bt = _BackTranslator(table)
    return bt.formula(phi)


class _BackTranslator:
    def __init__(self, table: SymbolTable):
        self.table = table
        self.sig = table.sig

    def fail(self, what: str, node) -> UntranslatableError:
        return UntranslatableError(what, raw=rformula_text(node) if not
                                   isinstance(node, (RVar, RConst, RApp)) else str(node))

    # classification of reduced terms
    def adt_term(self, t: RTerm) -> tuple[Term, str] | None:
        """ADT term and its sort, if the reduced term stands for one."""
        if isinstance(t, RVar):
            origin = self.table.origin_of_var(t.name)
            if origin[0] == "var":
                return Var(origin[1], origin[2]), origin[2]
            return None
        if isinstance(t, RApp):
            origin = self.table.origin_of_fun(t.fn)
            if origin is None:
                return None
            if origin[0] == "ctor":
                decl = self.sig.ctor(origin[1])
                args = []
                for a, (_, arg_sort) in zip(t.args, decl.args):
                    got = self.adt_term(a)
                    if got is None and isinstance(a, RConst) \
                            and arg_sort in self.table.enum_sorts:
                        # fixed index-to-constructor mapping of the
                        # enumeration optimization, applied argument-wise
                        ctors = self.sig.ctors_of(arg_sort)
                        if 0 <= a.value < len(ctors):
                            got = (Ctor(ctors[a.value].name, ()), arg_sort)
                    if got is None or got[1] != arg_sort:
                        return None
                    args.append(got[0])
                return Ctor(decl.name, tuple(args)), decl.sort
            if origin[0] == "sel":
                _, ctor_name, j = origin
                decl = self.sig.ctor(ctor_name)
                got = self.adt_term(t.args[0])
                if got is None or got[1] != decl.sort:
                    return None
                return Sel(ctor_name, j, got[0]), decl.args[j][1]
            return None
        return None

    def int_expr(self, t: RTerm) -> IntExpr | None:
        """Integer expression, if the reduced term stands for one."""
        if isinstance(t, RConst):
            return IntConst(t.value)
        if isinstance(t, RVar):
            origin = self.table.origin_of_var(t.name)
            if origin[0] == "int":
                return IntVar(origin[1])
            if origin[0] == "var":
                sort = origin[2]
                if sort in self.table.enum_sorts:
                    return None  # handled by the enum-comparison path
                return None
            return None
        if isinstance(t, RApp):
            origin = self.table.origin_of_fun(t.fn)
            if origin is None:
                return None
            if origin[0] == "size":
                got = self.adt_term(t.args[0])
                if got is None or got[1] != origin[1]:
                    return None
                return SizeOf(got[0])
            if origin[0] == "uf":
                args = [self.int_expr(a) for a in t.args]
                if any(a is None for a in args):
                    return None
                from .terms import IntApp
                return IntApp(origin[1], tuple(args))
            return None
        return None

    def ctorid_pattern(self, t: RTerm) -> tuple[Term, str] | None:
        """The ADT term under a head-index application."""
        if isinstance(t, RApp):
            origin = self.table.origin_of_fun(t.fn)
            if origin is not None and origin[0] == "ctorid":
                got = self.adt_term(t.args[0])
                if got is not None and got[1] == origin[1]:
                    return got
        return None

    def enum_var(self, t: RTerm) -> tuple[Term, str] | None:
        if isinstance(t, RVar):
            origin = self.table.origin_of_var(t.name)
            if origin[0] == "var" and origin[2] in self.table.enum_sorts:
                return Var(origin[1], origin[2]), origin[2]
        return None

    def tester_disjunction(self, term: Term, sort: str, allowed) -> Formula:
        ctors = self.sig.ctors_of(sort)
        names = [c.name for i, c in enumerate(ctors) if allowed(i)]
        if not names:
            return FALSE
        if len(names) == len(ctors):
            return TRUE
        if len(names) == len(ctors) - 1:
            missing = next(c.name for i, c in enumerate(ctors) if not allowed(i))
            return Not(Tester(missing, term))
        return disj([Tester(n, term) for n in names])

    def enum_comparison(self, term: Term, sort: str, allowed) -> Formula:
        ctors = self.sig.ctors_of(sort)
        names = [c.name for i, c in enumerate(ctors) if allowed(i)]
        if not names:
            return FALSE
        if len(names) == len(ctors):
            return TRUE
        if len(names) == len(ctors) - 1:
            missing = next(c.name for i, c in enumerate(ctors) if not allowed(i))
            return Not(Eq(term, Ctor(missing, ())))
        return disj([Eq(term, Ctor(n, ())) for n in names])

    # formulas
    def formula(self, f: RFormula) -> Formula:
        if isinstance(f, RTrueF):
            return TRUE
        if isinstance(f, RFalseF):
            return FALSE
        if isinstance(f, RAnd):
            return conj([self.formula(a) for a in f.args])
        if isinstance(f, ROr):
            return disj([self.formula(a) for a in f.args])
        if isinstance(f, RNot):
            inner = self.atom(f.arg.lhs, f.arg.rhs, negate=True)
            return inner
        if isinstance(f, REq):
            return self.atom(f.lhs, f.rhs, negate=False)
        if isinstance(f, RLin):
            return self.linear(f)
        raise InternalError(f"unexpected reduced formula {f}")

    def atom(self, lhs: RTerm, rhs: RTerm, negate: bool) -> Formula:
        # head-index comparisons translate to testers
        for a, b in ((lhs, rhs), (rhs, lhs)):
            pat = self.ctorid_pattern(a)
            if pat is not None and isinstance(b, RConst):
                term, sort = pat
                n = len(self.sig.ctors_of(sort))
                if not (0 <= b.value < n):
                    raise self.fail("head index compared to a value outside the "
                                    "constructor range", a)
                if negate:
                    return self.tester_disjunction(term, sort,
                                                   lambda i: i != b.value)
                return Tester(self.sig.ctors_of(sort)[b.value].name, term)
        # enumeration variables compared with constants use the fixed mapping
        for a, b in ((lhs, rhs), (rhs, lhs)):
            ev = self.enum_var(a)
            if ev is not None and isinstance(b, RConst):
                term, sort = ev
                n = len(self.sig.ctors_of(sort))
                if not (0 <= b.value < n):
                    raise self.fail("enumeration value outside the constructor "
                                    "range", a)
                target = Eq(term, Ctor(self.sig.ctors_of(sort)[b.value].name, ()))
                return Not(target) if negate else target
        # ADT term equality
        ta, tb = self.adt_term(lhs), self.adt_term(rhs)
        if ta is not None and tb is not None and ta[1] == tb[1]:
            out = Eq(ta[0], tb[0])
            return Not(out) if negate else out
        # integer equality
        ia, ib = self.int_expr(lhs), self.int_expr(rhs)
        if ia is not None and ib is not None:
            return SizeAtom("ne" if negate else "eq", ia, ib)
        raise self.fail("equality mixes untranslatable operands", REq(lhs, rhs))

    def linear(self, f: RLin) -> Formula:
        # pattern: single head-index application against a constant
        if len(f.terms) == 1 and f.op in ("eq", "ne"):
            c, t = f.terms[0]
            pat = self.ctorid_pattern(t)
            if pat is not None and abs(c) == 1:
                value = -f.const * c
                term, sort = pat
                n = len(self.sig.ctors_of(sort))
                if not (0 <= value < n):
                    raise self.fail("head index compared to a value outside the "
                                    "constructor range", t)
                if f.op == "eq":
                    return Tester(self.sig.ctors_of(sort)[value].name, term)
                return self.tester_disjunction(term, sort, lambda i: i != value)
            ev = self.enum_var(t)
            if ev is not None and abs(c) == 1:
                value = -f.const * c
                term, sort = ev
                return self.enum_comparison(
                    term, sort,
                    (lambda i: i == value) if f.op == "eq" else (lambda i: i != value))
        # range atoms over head indices / enum variables translate to tester sets
        if len(f.terms) == 1 and f.op == "le":
            c, t = f.terms[0]
            pat = self.ctorid_pattern(t) or self.enum_var(t)
            if pat is not None and abs(c) == 1:
                term, sort = pat
                n = len(self.sig.ctors_of(sort))
                # c*id + const <= 0
                if c == 1:
                    allowed = lambda i: i <= -f.const
                else:
                    allowed = lambda i: i >= f.const
                if self.ctorid_pattern(t) is not None:
                    return self.tester_disjunction(term, sort, allowed)
                return self.enum_comparison(term, sort, allowed)
        # otherwise every operand must be an integer expression
        exprs: list[IntExpr] = []
        for c, t in f.terms:
            e = self.int_expr(t)
            if e is None:
                raise self.fail("arithmetic over an ADT variable of a "
                                "non-enumeration sort", f)
            exprs.append(e if c == 1 else IntMul(c, e))
        lhs: IntExpr
        if not exprs:
            lhs = IntConst(0)
        elif len(exprs) == 1:
            lhs = exprs[0]
        else:
            lhs = IntAdd(tuple(exprs))
        op = {"le": "le", "eq": "eq", "ne": "ne"}[f.op]
        return SizeAtom(op, lhs, IntConst(-f.const))


# -- verification ----------------------------------------------------------------------------

def validate_interpolant(interpolant: Formula, prob: InterpolationProblem,
                         fuel: int = DEFAULT_FUEL) -> bool:
    """Vocabulary containment plus both implications, decided by our own solver."""
    from .sizesolve import decide

    shared_adt, shared_int = prob.shared_vars()
    fv = free_vars(interpolant)
    if not fv.adt <= shared_adt or not fv.ints <= shared_int:
        return False
    first = decide(And((prob.a, Not(interpolant))), prob.sig, fuel=fuel)
    if first.status != "unsat":
        return False
    second = decide(And((prob.b, interpolant)), prob.sig, fuel=fuel)
    return second.status == "unsat"
