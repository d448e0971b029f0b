"""End-to-end decision loop for formulas with size constraints.

Reduce in size mode, solve, and test the termination conditions: an unsat
reduct settles the input, and a sat reduct is accepted once every ADT
variable's integer value coincides with the value of some unfolded variable
of the same sort.  Otherwise one more variable is unfolded into its
constructor cases and the loop repeats, up to a fuel bound; running out of
fuel yields an unknown verdict carrying the expandingness diagnosis.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import backend
from .backend import eval_reduced
from .errors import AdtSolveError, InternalError
from .models import ReconstructionStats, check_model, reconstruct
from .normalize import FlatFormula, flatten, to_nnf
from .reduce import (
    DEPTH_MODE, SIZE_MODE, ReduceOptions, ReducedFormula, reduce, simplify,
)
from .signature import ExpandingReport, Signature, check_expanding, ensure_valid
from .terms import (
    AdtModel, Ctor, Eq, Formula, SizeAtom, SizeOf, Var, conj, disj,
)

DEFAULT_FUEL = 100
_STARVATION_AGE = 4


class AlreadyUnfoldedError(AdtSolveError):
    pass


class UnknownVariableError(AdtSolveError):
    pass


@dataclass
class UnfoldState:
    """Formula under unfolding: tagged conjuncts plus unfolding bookkeeping."""

    sig: Signature
    conjuncts: list[tuple[str, Formula]]
    var_sorts: dict[str, str]
    int_vars: set[str]
    registry: dict[str, object]
    var_partition: dict[str, str]
    unfolded: set[str] = field(default_factory=set)
    rounds: int = 0
    fuel: int = DEFAULT_FUEL
    sites: dict[str, tuple[str, int]] = field(default_factory=dict)
    creation_order: list[str] = field(default_factory=list)
    waiting_age: dict[str, int] = field(default_factory=dict)
    counter: int = 0

    def flat(self) -> FlatFormula:
        return FlatFormula(
            formula=conj([f for _, f in self.conjuncts]),
            registry=self.registry,
            var_sorts=self.var_sorts,
            int_vars=self.int_vars,
        )

    def root_of(self, name: str) -> str:
        while name in self.sites:
            name = self.sites[name][0]
        return name


def make_state(flat: FlatFormula, sig: Signature, fuel: int = DEFAULT_FUEL,
               partition: str = "A") -> UnfoldState:
    state = UnfoldState(
        sig=sig,
        conjuncts=[(partition, flat.formula)],
        var_sorts=dict(flat.var_sorts),
        int_vars=set(flat.int_vars),
        registry=dict(flat.registry),
        var_partition={v: partition for v in flat.var_sorts},
        fuel=fuel,
    )
    state.creation_order = list(flat.var_sorts)
    return state


def unfold_step(state: UnfoldState, name: str) -> UnfoldState:
    """Conjoin the constructor-case disjunction for one variable."""
    if name not in state.var_sorts:
        raise UnknownVariableError(name)
    if name in state.unfolded:
        raise AlreadyUnfoldedError(name)
    sort = state.var_sorts[name]
    partition = state.var_partition.get(name, "A")
    x = Var(name, sort)
    cases = []
    state.rounds += 1
    for decl in state.sig.ctors_of(sort):
        args = []
        for _, arg_sort in decl.args:
            state.counter += 1
            fresh = f"_u{state.counter}"
            while fresh in state.var_sorts or fresh in state.int_vars:
                state.counter += 1
                fresh = f"_u{state.counter}"
            state.var_sorts[fresh] = arg_sort
            state.var_partition[fresh] = partition
            state.sites[fresh] = (name, state.rounds)
            state.creation_order.append(fresh)
            args.append(Var(fresh, arg_sort))
        cases.append(Eq(Ctor(decl.name, tuple(args)), x))
    state.conjuncts.append((partition, disj(cases)))
    state.unfolded.add(name)
    state.waiting_age.pop(name, None)
    return state


@dataclass
class Diagnosis:
    text: str
    report: ExpandingReport | None = None
    mismatches: list[tuple[str, int]] = field(default_factory=list)


@dataclass
class SizeSolveResult:
    status: str  # 'sat' | 'unsat' | 'unknown'
    model: AdtModel | None = None
    diagnosis: Diagnosis | None = None
    rounds: int = 0
    state: UnfoldState | None = None
    reduct: ReducedFormula | None = None
    int_model: backend.IntModel | None = None
    recon_stats: ReconstructionStats | None = None


def _select_variable(state: UnfoldState, mismatched: list[str],
                     model: backend.IntModel, reduct: ReducedFormula) -> str:
    """Smallest current size value first, ties by creation order; a variable
    kept waiting too long is served by age to preserve systematic fairness."""
    for v in mismatched:
        state.waiting_age[v] = state.waiting_age.get(v, 0) + 1
    for v in list(state.waiting_age):
        if v not in mismatched:
            state.waiting_age.pop(v)
    starved = [v for v in mismatched if state.waiting_age.get(v, 0) >= _STARVATION_AGE]
    order = {n: i for i, n in enumerate(state.creation_order)}
    if starved:
        return min(starved, key=lambda v: order[v])

    size_funs = {origin[1]: name for name, (_, origin) in reduct.table.funs.items()
                 if origin[0] == "size"}

    def size_of(v: str) -> int:
        fn = size_funs.get(state.var_sorts[v])
        return model.app(fn, (model.value(v),)) if fn else 0

    return min(mismatched, key=lambda v: (size_of(v), order[v]))


def solve_with_size(phi: Formula, sig: Signature, fuel: int = DEFAULT_FUEL,
                    opts: ReduceOptions = ReduceOptions(),
                    use_simplify: bool = True,
                    external_cmd: str | None = None) -> SizeSolveResult:
    """Decide a well-typed formula that may contain size constraints."""
    ensure_valid(sig)
    flat = flatten(to_nnf(phi), sig)
    state = make_state(flat, sig, fuel=fuel)
    return run_loop(state, opts=opts, use_simplify=use_simplify,
                    external_cmd=external_cmd)


def run_loop(state: UnfoldState, opts: ReduceOptions = ReduceOptions(),
             use_simplify: bool = True,
             external_cmd: str | None = None) -> SizeSolveResult:
    sig = state.sig
    rounds = 0
    while True:
        reduct = reduce(state.flat(), sig, SIZE_MODE, opts)
        query = simplify(reduct) if use_simplify else reduct
        if external_cmd:
            result = backend.solve_external(query, external_cmd)
        else:
            result = backend.solve(query)
        if result.status == "unsat":
            return SizeSolveResult("unsat", rounds=rounds, state=state)
        if result.status == "unknown":
            return SizeSolveResult(
                "unknown", rounds=rounds, state=state,
                diagnosis=Diagnosis(f"backend gave up: {result.reason}"))
        model = backend.complete_model(query, result.model) if query.trace \
            else result.model
        # acceptance test: every ADT variable's value matches an unfolded
        # variable of the same sort; unconstrained variables are repointed at
        # unfolded values first when the formula stays satisfied
        values_of_unfolded: dict[str, set[int]] = {}
        for u in state.unfolded:
            values_of_unfolded.setdefault(state.var_sorts[u], set()).add(model.value(u))
        base = query.base or query
        for v, sort in state.var_sorts.items():
            candidates = values_of_unfolded.get(sort, set())
            if not candidates or model.value(v) in candidates:
                continue
            old = model.value(v)
            for w in sorted(candidates):
                model.values[v] = w
                if eval_reduced(base.formula, model):
                    break
                model.values[v] = old
        mismatched = [v for v, sort in state.var_sorts.items()
                      if model.value(v) not in values_of_unfolded.get(sort, set())]
        if not mismatched:
            stats = ReconstructionStats()
            adt_model = reconstruct(query, model, stats, precompleted=True)
            ok, diag = check_model(sig, adt_model, state.flat().formula)
            if not ok:
                raise InternalError(f"reconstructed model failed validation: {diag}")
            if stats.case3_pairs:
                var_pairs = {(model.value(v), s) for v, s in state.var_sorts.items()}
                if var_pairs & set(stats.case3_pairs):
                    raise InternalError("fresh term drawn for a constrained variable "
                                        "after the acceptance test fired")
            return SizeSolveResult("sat", model=adt_model, rounds=rounds,
                                   state=state, reduct=query,
                                   int_model=result.model, recon_stats=stats)
        if rounds >= state.fuel:
            report = check_expanding(sig)
            lines = ["fuel exhausted before the unfolding loop converged"]
            for s in report.non_expanding_sorts:
                cycle = " -> ".join(report.witness(s))
                lines.append(f"{s}: non-expanding (cycle: {cycle})")
            if report.all_expanding:
                lines.append("all sorts expanding: raise the fuel limit to decide")
            return SizeSolveResult(
                "unknown", rounds=rounds, state=state,
                diagnosis=Diagnosis("\n".join(lines), report,
                                    [(v, model.value(v)) for v in mismatched]))
        target = _select_variable(state, mismatched, model, query)
        unfold_step(state, target)
        rounds += 1


def decide(phi: Formula, sig: Signature, fuel: int = DEFAULT_FUEL,
           opts: ReduceOptions = ReduceOptions(), use_simplify: bool = True,
           external_cmd: str | None = None) -> SizeSolveResult:
    """Dispatch: size-free formulas go through the one-shot depth-mode
    reduction, formulas with size atoms through the unfolding loop."""
    if _has_size_atoms(phi):
        return solve_with_size(phi, sig, fuel=fuel, opts=opts,
                               use_simplify=use_simplify, external_cmd=external_cmd)
    flat = flatten(to_nnf(phi), sig)
    reduct = reduce(flat, sig, DEPTH_MODE, opts)
    query = simplify(reduct) if use_simplify else reduct
    if external_cmd:
        result = backend.solve_external(query, external_cmd)
    else:
        result = backend.solve(query)
    if result.status == "unsat":
        return SizeSolveResult("unsat")
    if result.status == "unknown":
        return SizeSolveResult("unknown",
                               diagnosis=Diagnosis(f"backend gave up: {result.reason}"))
    stats = ReconstructionStats()
    adt_model = reconstruct(query, result.model, stats)
    ok, diag = check_model(sig, adt_model, flat.formula)
    if not ok:
        raise InternalError(f"reconstructed model failed validation: {diag}")
    return SizeSolveResult("sat", model=adt_model, reduct=query,
                           int_model=result.model, recon_stats=stats)


def _has_size_atoms(phi: Formula) -> bool:
    def in_expr(e) -> bool:
        if isinstance(e, SizeOf):
            return True
        if hasattr(e, "args"):
            return any(in_expr(a) for a in e.args)
        if hasattr(e, "arg") and not isinstance(e, SizeOf):
            return in_expr(e.arg)
        return False

    def walk(f: Formula) -> bool:
        if isinstance(f, SizeAtom):
            return in_expr(f.lhs) or in_expr(f.rhs) or True
        if hasattr(f, "args"):
            return any(walk(a) for a in f.args)
        if hasattr(f, "arg"):
            return walk(f.arg)
        return False

    return walk(phi)


def completeness_report(sig: Signature) -> str:
    """Human-readable completeness verdict for the size decision loop."""
    report = check_expanding(sig)
    if report.all_expanding:
        return ("decision procedure complete: all sorts expanding; "
                "systematic unfolding terminates on every formula")
    lines = ["decision procedure incomplete: unknown verdicts are possible"]
    for s in report.non_expanding_sorts:
        cycle = " -> ".join(report.witness(s))
        lines.append(f"{s}: non-expanding (cycle: {cycle})")
    return "\n".join(lines)
