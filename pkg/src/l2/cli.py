"""Command-line frontend.

Subcommands: check, elaborate, run, vcs, infer, fuzz.  Every subcommand
accepts --json for structured output.  Exit codes: 0 success/accepted,
1 rejected by refinement checking, 2 elaboration error, 64 usage error,
65 parse error, 70 internal invariant violation.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from dataclasses import dataclass

from . import harness, infer, source_interp, syntax, target_interp
from .elaborate import ElabError, elaborate_program
from .logic import ResourceLimit, pand, render_pred, to_smtlib
from .parser import ParseError, parse_pred, parse_program
from .refine import PhaseOrderError, RefEnv, check_refined
from .target import IllTyped, print_ref_type, print_target

EXIT_OK = 0
EXIT_REJECTED = 1
EXIT_ELAB_ERROR = 2
EXIT_USAGE = 64
EXIT_PARSE = 65
EXIT_INTERNAL = 70


@dataclass
class Config:
    fuel: int = 100000
    search_depth: int = 64
    clause_budget: int = 10000
    trace: bool = False
    json: bool = False


def _read_program(path: str):
    with open(path, "r", encoding="utf-8") as handle:
        return parse_program(handle.read())


def _emit(payload: dict, as_json: bool, text: str) -> None:
    if as_json:
        print(json.dumps(payload, indent=2))
    else:
        print(text, end="" if text.endswith("\n") else "\n")


def _vc_payload(vc, verdict=None) -> dict:
    out = {
        "origin": vc.origin,
        "hypotheses": [render_pred(h) for h in vc.hyps],
        "antecedent": render_pred(vc.antecedent),
        "consequent": render_pred(vc.consequent),
        "rendered": vc.render(),
    }
    if verdict is not None:
        out["verdict"] = verdict.kind
    return out


def cmd_check(args, config: Config) -> int:
    program = _read_program(args.file)
    try:
        result = elaborate_program(program, config.search_depth)
    except ElabError as exc:
        _emit({"status": "elab-error", "message": str(exc)}, config.json,
              f"phase 1 error: {exc}")
        return EXIT_ELAB_ERROR
    report = check_refined(RefEnv(), result.target, clause_budget=config.clause_budget)
    payload = {
        "status": "accepted" if report.accepted else "rejected",
        "type": print_ref_type(report.type),
        "vcs": [_vc_payload(vc, v) for vc, v in zip(report.vcs, report.verdicts)],
    }
    lines = []
    if args.explain or not report.accepted:
        shown = report.failures() if (report.failures() and not args.explain) else list(
            zip(report.vcs, report.verdicts)
        )
        for vc, verdict in shown:
            lines.append(f"[{verdict.kind}] {vc.origin}: {vc.render()}")
    lines.append("accepted" if report.accepted else "rejected")
    _emit(payload, config.json, "\n".join(lines))
    return EXIT_OK if report.accepted else EXIT_REJECTED


def cmd_elaborate(args, config: Config) -> int:
    program = _read_program(args.file)
    try:
        result = elaborate_program(program, config.search_depth)
    except ElabError as exc:
        _emit({"status": "elab-error", "message": str(exc)}, config.json,
              f"phase 1 error: {exc}")
        return EXIT_ELAB_ERROR
    payload = {
        "type": syntax.print_type(result.type),
        "flag": result.flag,
        "target": print_target(result.target),
        "trace": list(result.trace),
    }
    text = (
        f"type: {payload['type']}\nflag: {payload['flag']}\n"
        f"target: {payload['target']}\ntrace: {' '.join(result.trace)}"
    )
    _emit(payload, config.json, text)
    return EXIT_OK


def cmd_run(args, config: Config) -> int:
    program = _read_program(args.file)
    if args.lang == "src":
        src = syntax.erase_ascriptions(program.main)
        outcome, rules, _ = source_interp.eval_source_trace(src, config.fuel)
        kind = type(outcome).__name__
        final = {
            "Value": lambda o: syntax.print_expr(o.value),
            "StuckAt": lambda o: f"{syntax.print_expr(o.expr)} ({o.reason})",
            "FuelExhausted": lambda o: syntax.print_expr(o.expr),
        }[kind](outcome)
    else:
        try:
            result = elaborate_program(program, config.search_depth)
        except ElabError as exc:
            _emit({"status": "elab-error", "message": str(exc)}, config.json,
                  f"phase 1 error: {exc}")
            return EXIT_ELAB_ERROR
        outcome, rules, _ = target_interp.eval_target_trace(result.target, config.fuel)
        kind = type(outcome).__name__.lstrip("T")
        final = {
            "Value": lambda o: print_target(o.value),
            "StuckAt": lambda o: f"{print_target(o.expr)} ({o.reason})",
            "FuelExhausted": lambda o: print_target(o.expr),
        }[kind](outcome)
    payload = {"outcome": kind, "result": final, "steps": len(rules), "trace": rules}
    lines = [*(rules if config.trace else []), f"{kind}: {final}", f"steps: {len(rules)}"]
    _emit(payload, config.json, "\n".join(lines))
    return EXIT_OK


def _slug(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9]+", "_", text).strip("_") or "vc"


def cmd_vcs(args, config: Config) -> int:
    program = _read_program(args.file)
    try:
        result = elaborate_program(program, config.search_depth)
    except ElabError as exc:
        _emit({"status": "elab-error", "message": str(exc)}, config.json,
              f"phase 1 error: {exc}")
        return EXIT_ELAB_ERROR
    report = check_refined(RefEnv(), result.target, clause_budget=config.clause_budget)
    if args.smtlib:
        import os

        os.makedirs(args.smtlib, exist_ok=True)
        for i, vc in enumerate(report.vcs):
            name = f"vc{i:03d}_{_slug(vc.origin)}.smt2"
            with open(os.path.join(args.smtlib, name), "w", encoding="utf-8") as handle:
                handle.write(to_smtlib(vc))
    payload = {"vcs": [_vc_payload(vc, v) for vc, v in zip(report.vcs, report.verdicts)]}
    lines = [
        f"[{v.kind}] {vc.origin}: {vc.render()}"
        for vc, v in zip(report.vcs, report.verdicts)
    ]
    _emit(payload, config.json, "\n".join(lines) if lines else "no verification conditions")
    return EXIT_OK


def cmd_infer(args, config: Config) -> int:
    program = _read_program(args.file)
    candidates = None
    if args.preds:
        with open(args.preds, "r", encoding="utf-8") as handle:
            preds = [parse_pred(line.strip()) for line in handle if line.strip()]
        clauses, kappas, _ = infer.gen_horn(program)
        candidates = {k.id: list(preds) for k in kappas if k.sort == syntax.NUMBER}
        for k in kappas:
            candidates.setdefault(k.id, [])
    try:
        outcome, clauses, kappas, templated = infer.infer_refinements(program, candidates)
    except ElabError as exc:
        _emit({"status": "elab-error", "message": str(exc)}, config.json,
              f"phase 1 error: {exc}")
        return EXIT_ELAB_ERROR
    if isinstance(outcome, infer.Unsat):
        _emit(
            {"status": "unsat", "clause": outcome.clause.render()},
            config.json,
            f"no solution: clause fails under the weakest assignment\n"
            f"  {outcome.clause.render()}",
        )
        return EXIT_REJECTED
    solved = infer.apply_solution(templated, outcome)
    payload = {
        "status": "solved",
        "solution": {k: render_pred(pand(v)) for k, v in sorted(outcome.assignment.items())},
        "clauses": [c.render() for c in clauses],
        "program": syntax.print_program(solved),
    }
    lines = [f"{k} := {render_pred(pand(v))}" for k, v in sorted(outcome.assignment.items())]
    lines.append(syntax.print_program(solved))
    _emit(payload, config.json, "\n".join(lines))
    return EXIT_OK


def cmd_fuzz(args, config: Config) -> int:
    stats = harness.run_fuzz(
        trials=args.trials,
        seed=args.seed,
        fuel=args.fuzz_fuel,
        size_budget=args.budget,
        check_soundness=not args.no_soundness,
        shrink=args.shrink,
    )
    for report in stats.reports:
        print(json.dumps(report.to_json()))
    summary = {
        "trials": args.trials,
        "counterexamples": stats.counterexamples,
        "inconclusive": stats.inconclusive,
        "assumption1_violations": stats.assumption1_violations,
        "canonical_violations": stats.canonical_violations,
        "substitution_violations": stats.substitution_violations,
        "soundness_failures": stats.soundness_failures,
        "accepted": stats.accepted,
    }
    print(json.dumps(summary), file=sys.stderr)
    bad = (
        stats.counterexamples
        + stats.assumption1_violations
        + stats.canonical_violations
        + stats.substitution_violations
        + stats.soundness_failures
    )
    return EXIT_OK if bad == 0 else EXIT_REJECTED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="l2", description="two-phase overload checker")
    parser.add_argument("--json", action="store_true", help="structured output")
    parser.add_argument("--config", metavar="FILE", help="JSON config file (defaults to .l2.json)")
    parser.add_argument("--fuel", type=int, default=None)
    parser.add_argument("--search-depth", type=int, default=None)
    parser.add_argument("--clause-budget", type=int, default=None)
    sub = parser.add_subparsers(dest="command", required=True)

    p_check = sub.add_parser("check", help="run both phases")
    p_check.add_argument("file")
    p_check.add_argument("--explain", action="store_true")
    p_check.set_defaults(fn=cmd_check)

    p_elab = sub.add_parser("elaborate", help="run phase 1 and print the target")
    p_elab.add_argument("file")
    p_elab.set_defaults(fn=cmd_elaborate)

    p_run = sub.add_parser("run", help="evaluate a program")
    p_run.add_argument("file")
    p_run.add_argument("--lang", choices=["src", "tgt"], default="src")
    p_run.add_argument("--trace", action="store_true")
    p_run.set_defaults(fn=cmd_run)

    p_vcs = sub.add_parser("vcs", help="print verification conditions")
    p_vcs.add_argument("file")
    p_vcs.add_argument("--smtlib", metavar="DIR", help="write one .smt2 file per VC")
    p_vcs.set_defaults(fn=cmd_vcs)

    p_infer = sub.add_parser("infer", help="infer refinements for kappa templates")
    p_infer.add_argument("file")
    p_infer.add_argument("--preds", metavar="FILE", help="candidate predicates, one per line")
    p_infer.set_defaults(fn=cmd_infer)

    p_fuzz = sub.add_parser("fuzz", help="differential testing")
    p_fuzz.add_argument("--trials", type=int, default=100)
    p_fuzz.add_argument("--seed", type=int, default=0)
    p_fuzz.add_argument("--fuel", type=int, default=10000, dest="fuzz_fuel",
                        help="per-trial fuel")
    p_fuzz.add_argument("--budget", type=int, default=30)
    p_fuzz.add_argument("--no-soundness", action="store_true")
    p_fuzz.add_argument("--shrink", action="store_true")
    p_fuzz.set_defaults(fn=cmd_fuzz)
    return parser


def _load_config(args) -> Config:
    """Flags override file configuration, which overrides built-in defaults."""
    import os

    file_values: dict = {}
    path = args.config or (".l2.json" if os.path.exists(".l2.json") else None)
    if path:
        with open(path, "r", encoding="utf-8") as handle:
            file_values = json.load(handle)
    defaults = Config()

    def pick(flag, key, fallback):
        if flag is not None:
            return flag
        return file_values.get(key, fallback)

    return Config(
        fuel=pick(args.fuel, "fuel", defaults.fuel),
        search_depth=pick(args.search_depth, "search_depth", defaults.search_depth),
        clause_budget=pick(args.clause_budget, "clause_budget", defaults.clause_budget),
        trace=getattr(args, "trace", False),
        json=args.json,
    )


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    config = _load_config(args)
    try:
        return args.fn(args, config)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (IllTyped, PhaseOrderError, ResourceLimit) as exc:
        print(f"internal invariant violation: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
