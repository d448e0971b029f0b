"""Command-line interface.

Subcommands: solve, analyze, emit, interpolate, corpus.  Exit codes: 0 the
command ran to a verdict, 1 usage error, 2 input error, 3 backend or
resource error.
"""

from __future__ import annotations

import argparse
import sys

from . import corpus as corpus_mod
from . import backend as backend_mod
from .errors import (
    AdtSolveError, InputError, ProtocolError, ResourceLimitError, SpawnError,
)
from .interp import InterpolatingBackend, InterpolationProblem, interpolate
from .normalize import flatten, to_nnf
from .parser import parse_script
from .reduce import DEPTH_MODE, SIZE_MODE, ReduceOptions, reduce, rformula_nodes, simplify
from .semantics import print_model
from .signature import cardinality, check_expanding, size_image
from .sizesolve import completeness_report, decide
from .terms import formula_nodes


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="adtsolve", add_help=True)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--backend", choices=["builtin", "external"], default="builtin")
        sp.add_argument("--external-cmd", default=None,
                        help="command line of an SMT-LIB solver on stdio")
        sp.add_argument("--fuel", type=int, default=100)
        sp.add_argument("--no-opt", action="store_true",
                        help="disable the guarded-selector and enumeration optimizations")
        sp.add_argument("--stats", action="store_true")
        sp.add_argument("--seed", type=int, default=0)

    sp = sub.add_parser("solve", help="decide a script")
    sp.add_argument("file")
    sp.add_argument("--check-model", action="store_true",
                    help="print the result of the post-sat model validation")
    common(sp)

    sp = sub.add_parser("analyze", help="print signature analyses")
    sp.add_argument("file")
    common(sp)

    sp = sub.add_parser("emit", help="print the EUF+LIA reduct as SMT-LIB")
    sp.add_argument("file")
    sp.add_argument("--no-simplify", action="store_true")
    common(sp)

    sp = sub.add_parser("interpolate", help="interpolate two scripts")
    sp.add_argument("file_a")
    sp.add_argument("file_b")
    sp.add_argument("--dialect", choices=["smtinterpol", "cvc5"],
                    default="smtinterpol")
    common(sp)

    sp = sub.add_parser("corpus", help="run the seeded random agreement suite")
    sp.add_argument("--count", type=int, default=100)
    sp.add_argument("--sigs", type=int, default=5)
    common(sp)
    return p


def _opts(args) -> ReduceOptions:
    return ReduceOptions.none() if args.no_opt else ReduceOptions()


def _external(args) -> str | None:
    import os
    if args.backend == "external" or args.external_cmd:
        cmd = args.external_cmd or os.environ.get("ADTSOLVE_EXTERNAL_CMD")
        if not cmd:
            raise SpawnError("--backend external requires --external-cmd or "
                             "ADTSOLVE_EXTERNAL_CMD")
        return cmd
    return None


def _load(path: str):
    with open(path, encoding="utf-8") as fh:
        return parse_script(fh.read())


def cmd_solve(args, out) -> int:
    script = _load(args.file)
    phi = script.formula()
    ext = _external(args)
    result = decide(phi, script.sig, fuel=args.fuel, opts=_opts(args),
                    external_cmd=ext)
    print(result.status, file=out)
    if result.status == "sat":
        if args.check_model:
            print("model check: ok", file=out)
        source = set(script.var_sorts)
        print(print_model(script.sig, result.model, script.var_sorts, only=source),
              file=out)
    elif result.status == "unknown" and result.diagnosis:
        print(result.diagnosis.text, file=out)
    if args.stats:
        flat = flatten(to_nnf(phi), script.sig)
        mode = SIZE_MODE if _has_size(script) else DEPTH_MODE
        reduct = reduce(flat, script.sig, mode, _opts(args))
        simplified = simplify(reduct)
        print(f"nodes: input={formula_nodes(phi)} "
              f"reduced={rformula_nodes(reduct.formula)} "
              f"simplified={rformula_nodes(simplified.formula)}", file=out)
    return 0


def _has_size(script) -> bool:
    from .sizesolve import _has_size_atoms
    return _has_size_atoms(script.formula())


def cmd_analyze(args, out) -> int:
    script = _load(args.file)
    sig = script.sig
    report = check_expanding(sig)
    for sort in sig.sorts:
        card = cardinality(sig, sort)
        image = size_image(sig, sort)
        print(f"{sort}: cardinality {card}", file=out)
        print(f"{sort}: size image {image.describe()}", file=out)
        witness = report.witness(sort)
        if witness is None:
            print(f"{sort}: expanding", file=out)
        else:
            print(f"{sort}: non-expanding (cycle: {' -> '.join(witness)})", file=out)
    print(completeness_report(sig), file=out)
    return 0


def cmd_emit(args, out) -> int:
    script = _load(args.file)
    phi = script.formula()
    flat = flatten(to_nnf(phi), script.sig)
    mode = SIZE_MODE if _has_size(script) else DEPTH_MODE
    reduct = reduce(flat, script.sig, mode, _opts(args))
    if not args.no_simplify:
        reduct = simplify(reduct)
    print(backend_mod.emit_smtlib(reduct), end="", file=out)
    if args.stats:
        print(f"; nodes: input={formula_nodes(phi)} "
              f"reduced={rformula_nodes(reduct.formula)}", file=out)
    return 0


def cmd_interpolate(args, out) -> int:
    script_a = _load(args.file_a)
    script_b = _load(args.file_b)
    sig = script_a.sig
    if script_b.sig.sorts and script_b.sig != sig:
        if script_b.sig.sorts != sig.sorts or script_b.sig.ctors != sig.ctors:
            raise InputError("the two scripts declare different datatypes")
    ext = _external(args)
    if not ext:
        print("no external interpolating backend configured "
              "(--external-cmd or ADTSOLVE_EXTERNAL_CMD)", file=sys.stderr)
        return 3
    prob = InterpolationProblem(script_a.formula(), script_b.formula(), sig)
    backend = InterpolatingBackend(ext, dialect=args.dialect)
    outcome = interpolate(prob, backend, fuel=args.fuel, opts=_opts(args))
    if outcome.kind == "interpolant":
        from .semantics import print_formula
        print(print_formula(sig, outcome.interpolant), file=out)
        return 0
    if outcome.kind == "not-unsat":
        print("not-unsat", file=out)
        var_sorts = dict(script_a.var_sorts)
        var_sorts.update(script_b.var_sorts)
        print(print_model(sig, outcome.model, var_sorts,
                          only=set(var_sorts)), file=out)
        return 0
    if outcome.kind == "untranslatable":
        print(f"untranslatable: {outcome.raw}", file=out)
        return 0
    print(f"unknown: {outcome.diagnosis}", file=out)
    return 0


def cmd_corpus(args, out) -> int:
    stats = corpus_mod.run_agreement(args.seed, count=args.count, n_sigs=args.sigs)
    print(stats.summary(), file=out)
    return 0 if not stats.failures else 3


def main(argv: list[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code == 0 else 1
    try:
        if args.command == "solve":
            return cmd_solve(args, out)
        if args.command == "analyze":
            return cmd_analyze(args, out)
        if args.command == "emit":
            return cmd_emit(args, out)
        if args.command == "interpolate":
            return cmd_interpolate(args, out)
        if args.command == "corpus":
            return cmd_corpus(args, out)
        return 1
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except InputError as e:
        print(f"input error: {e}", file=sys.stderr)
        return 2
    except (SpawnError, ProtocolError, ResourceLimitError) as e:
        print(f"backend error: {e}", file=sys.stderr)
        return 3
    except AdtSolveError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


def entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
