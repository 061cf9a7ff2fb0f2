"""Command-line front-end.

Exit codes: 0 success, 1 analysis-negative (a "no" verdict or failed
reproduction), 2 usage, 3 parse/validation, 4 resource budget exceeded.
Machine files are JSON documents (see fileformat); the built-in fixture
machines are addressable as fixture:NAME.  QUANTAUTO_BUDGET overrides
the search/enumeration budgets.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .errors import (
    AccuracyError,
    ParseError,
    QuantAutoError,
    ResourceError,
    UsageError,
    ValidationError,
)
from .exactmath import format_rational, parse_rational
from .expressiveness import check_machine_iso, find_hom, level_measures, verify_counterexamples
from .fileformat import (
    machine_from_json,
    machine_to_json,
    run_from_json,
    run_to_obj,
    witness_to_obj,
)
from .fixtures import FIXTURES
from .machines import model_tag, validate_machine
from .measures import assign_weights, measure_run, measure_runset, mc_estimate, uniform_boundary_weights
from .runs import enumerate_runs, validate_run
from .translations import (
    delay_to_stochastic,
    nfa_to_prob,
    nfa_to_timed,
    prob_to_nfa_gcd,
    prob_to_probtimed,
    probtimed_to_delay,
    probtimed_to_timed,
    region_automaton,
    timed_to_probtimed,
)

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_RESOURCE = 4


def _budget(default: int = 10**6) -> int:
    raw = os.environ.get("QUANTAUTO_BUDGET")
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"QUANTAUTO_BUDGET must be an integer, got {raw!r}") from None


def _load_machine(source: str):
    if source.startswith("fixture:"):
        name = source.split(":", 1)[1]
        if name not in FIXTURES:
            raise UsageError(f"unknown fixture {name!r}; available: {', '.join(sorted(FIXTURES))}")
        return FIXTURES[name]()
    return machine_from_json(Path(source).read_text())


def _parse_grid(text: str | None):
    if not text:
        return None
    return tuple(parse_rational(part) for part in text.split(","))


def _weights_for(machine, slack_text: str | None):
    if model_tag(machine) not in ("nfa", "ta"):
        return None
    if slack_text is None:
        raise UsageError(f"{model_tag(machine)} machines need --weights SLACK")
    slack = parse_rational(slack_text)
    if slack == 0:
        return uniform_boundary_weights(machine)
    return assign_weights(machine, slack)


def _emit(args, payload: dict, text_lines: list[str]) -> None:
    if getattr(args, "json", False):
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        for line in text_lines:
            print(line)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_validate(args) -> int:
    machine = _load_machine(args.file)
    report = validate_machine(machine)
    payload = {"model": model_tag(machine), "ok": report.ok, "violations": report.violations}
    lines = [f"model: {model_tag(machine)}", f"valid: {report.ok}"]
    lines += [f"  - {v}" for v in report.violations]
    _emit(args, payload, lines)
    return EXIT_OK if report.ok else EXIT_PARSE


def cmd_runs(args) -> int:
    machine = _load_machine(args.file)
    runs = enumerate_runs(machine, args.depth, _parse_grid(args.grid), cap=_budget())
    payload = {"count": len(runs), "runs": [run_to_obj(r) for r in runs]}
    lines = [f"{len(runs)} runs at depth {args.depth}"]
    for r in runs:
        stamp = "" if r.times is None else " @ " + ",".join(format_rational(t) for t in r.times)
        lines.append("  " + "->".join(str(s) for s in r.states) + " [" + ",".join(r.labels) + "]" + stamp)
    _emit(args, payload, lines)
    return EXIT_OK


def cmd_measure(args) -> int:
    machine = _load_machine(args.file)
    weights = _weights_for(machine, args.weights)
    if (args.run is None) == (args.depth is None):
        raise UsageError("pass exactly one of --run FILE or --depth K")
    if args.run is not None:
        run = run_from_json(Path(args.run).read_text(), machine)
        ok, problems = validate_run(machine, run)
        if not ok:
            raise ValidationError("invalid run: " + "; ".join(problems))
        runs = [run]
    else:
        runs = enumerate_runs(machine, args.depth, _parse_grid(args.grid), cap=_budget())
    entries = []
    lines = []
    for r in runs:
        value = measure_run(machine, weights, r, per_step_product=args.per_step_product)
        entry = {
            "value": value.serialize(),
            "model": r.model,
            "run_length": r.steps,
            "states": list(r.states),
            "labels": list(r.labels),
        }
        text = f"H = {value.serialize()}  [{'->'.join(str(s) for s in r.states)}]"
        if args.mc:
            est, err = mc_estimate(machine, r, args.mc, seed=args.seed)
            entry["mc"] = {"estimate": est, "std_error": err, "samples": args.mc, "seed": args.seed}
            text += f"  mc {est:.9g} +/- {err:.3g}"
        entries.append(entry)
        lines.append(text)
    payload = {"measures": entries}
    if args.depth is not None and len(runs) > 1:
        total = measure_runset(machine, weights, runs)
        payload["collection"] = total.serialize()
        lines.append(f"L = {total.serialize()} over {len(runs)} runs")
    _emit(args, payload, lines)
    return EXIT_OK


_TRANSLATIONS = {
    ("nfa", "ta"): lambda m, a: nfa_to_timed(m),
    ("nfa", "pa"): lambda m, a: nfa_to_prob(m),
    ("ta", "pta"): lambda m, a: timed_to_probtimed(m),
    ("pa", "pta"): lambda m, a: prob_to_probtimed(m),
    ("pta", "tapd"): lambda m, a: probtimed_to_delay(m, a.pi),
    ("tapd", "sta"): lambda m, a: delay_to_stochastic(m),
    ("pa", "nfa-gcd"): lambda m, a: prob_to_nfa_gcd(m),
    ("pta", "ta"): lambda m, a: probtimed_to_timed(m),
}


def cmd_translate(args) -> int:
    machine = _load_machine(args.file)
    tag = model_tag(machine)
    if args.to == "region":
        if tag != "ta":
            raise UsageError("--to region needs a timed automaton")
        weights = _weights_for(machine, args.weights or "1/4")
        target, assignment, witness = region_automaton(machine, weights, budget=_budget(10**5))
        extra = {"weights": [format_rational(w) for w in assignment.weights]}
    else:
        key = (tag, args.to)
        if key not in _TRANSLATIONS:
            raise UsageError(f"no translation from {tag} to {args.to}")
        target, witness = _TRANSLATIONS[key](machine, args)
        extra = {}
    machine_text = machine_to_json(target)
    witness_doc = witness_to_obj(witness)
    witness_doc.update(extra)
    if args.out:
        Path(args.out).write_text(machine_text)
    else:
        print(machine_text, end="")
    witness_text = json.dumps(witness_doc, indent=2, sort_keys=True) + "\n"
    if args.witness_out:
        Path(args.witness_out).write_text(witness_text)
    else:
        print(witness_text, end="")
    return EXIT_OK


def cmd_express(args) -> int:
    machine_a = _load_machine(args.file_a)
    machine_b = _load_machine(args.file_b)
    grid = _parse_grid(args.grid)
    weights_a = _weights_for(machine_a, args.weights_a)
    weights_b = _weights_for(machine_b, args.weights_b)
    if args.mode == "iso":
        report = check_machine_iso(
            machine_a,
            machine_b,
            args.depth,
            grid,
            weights_a=weights_a,
            weights_b=weights_b,
            budget=_budget(),
            cap=_budget(),
        )
        payload = {
            "verdict": report.verdict,
            "depth": report.depth,
            "grid": None if report.grid is None else [format_rational(t) for t in report.grid],
            "reason": report.reason,
            "witness": None if report.witness is None else witness_to_obj(report.witness),
            "subsets_checked": report.subsets_checked,
            "subset_cap": report.subset_cap,
        }
        _emit(args, payload, [report.summary()])
        verdict = report.verdict
    else:
        runs_a, meas_a = level_measures(machine_a, weights_a, args.depth, grid, cap=_budget())
        runs_b, meas_b = level_measures(machine_b, weights_b, args.depth, grid, cap=_budget())
        hom = find_hom(runs_a, meas_a, runs_b, meas_b, budget=_budget())
        payload = {
            "verdict": "yes" if hom.accepted else "no",
            "relation": hom.relation,
            "depth": args.depth,
            "reason": hom.reason,
            "witness": None if hom.witness is None else witness_to_obj(hom.witness),
        }
        _emit(args, payload, [f"verdict {'yes' if hom.accepted else 'no'} at depth {args.depth} ({hom.relation}) {hom.reason}"])
        verdict = "yes" if hom.accepted else "no"
    if verdict == "yes":
        return EXIT_OK
    return EXIT_RESOURCE if verdict == "unknown" else EXIT_NEGATIVE


def cmd_repro(args) -> int:
    entries = verify_counterexamples()
    all_ok = all(e["passed"] for e in entries)
    if args.json:
        print(json.dumps({"passed": all_ok, "checks": entries}, indent=2, sort_keys=True, default=str))
    else:
        for e in entries:
            print(f"{'PASS' if e['passed'] else 'FAIL'}  {e['name']}")
            for key, value in e.items():
                if key not in ("name", "passed"):
                    print(f"      {key}: {value}")
    return EXIT_OK if all_ok else EXIT_NEGATIVE


def cmd_fixtures(args) -> int:
    if args.export:
        target = Path(args.export)
        target.mkdir(parents=True, exist_ok=True)
        for name, builder in sorted(FIXTURES.items()):
            (target / f"{name}.json").write_text(machine_to_json(builder()))
        print(f"wrote {len(FIXTURES)} fixtures to {target}")
        return EXIT_OK
    if args.dump:
        if args.dump not in FIXTURES:
            raise UsageError(f"unknown fixture {args.dump!r}")
        print(machine_to_json(FIXTURES[args.dump]()), end="")
        return EXIT_OK
    for name in sorted(FIXTURES):
        print(name)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quantauto",
        description="exact run measures, translations, and bounded expressiveness checks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="validate a machine file")
    p.add_argument("file")
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("runs", help="enumerate runs of a machine")
    p.add_argument("file")
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--grid", help="comma-separated rational time stamps")
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_runs)

    p = sub.add_parser("measure", help="run measures (and optional MC cross-check)")
    p.add_argument("file")
    p.add_argument("--run", help="run file to measure")
    p.add_argument("--depth", type=int, help="measure all runs of this depth")
    p.add_argument("--grid")
    p.add_argument("--weights", help="slack for nfa/ta weighting (0 = boundary uniform)")
    p.add_argument("--mc", type=int, help="Monte-Carlo sample count for density models")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--per-step-product", action="store_true")
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_measure)

    p = sub.add_parser("translate", help="constructive translations with witness output")
    p.add_argument("file")
    p.add_argument("--to", required=True, choices=["ta", "pa", "pta", "tapd", "sta", "region", "nfa-gcd"])
    p.add_argument("--pi", type=int, default=1, help="truncation degree for --to tapd")
    p.add_argument("--weights", help="slack for --to region")
    p.add_argument("--out", help="write the target machine here")
    p.add_argument("--witness-out", help="write the witness here")
    p.set_defaults(fn=cmd_translate)

    p = sub.add_parser("express", help="bounded-depth expressiveness verdict")
    p.add_argument("file_a")
    p.add_argument("file_b")
    p.add_argument("--mode", choices=["iso", "hom"], default="iso")
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--grid")
    p.add_argument("--weights-a")
    p.add_argument("--weights-b")
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_express)

    p = sub.add_parser("repro", help="reproduce the packaged separation evidence")
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_repro)

    p = sub.add_parser("fixtures", help="list, dump, or export the built-in machines")
    p.add_argument("--export", help="write all fixtures into this directory")
    p.add_argument("--dump", help="print one fixture")
    p.set_defaults(fn=cmd_fixtures)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ParseError, ValidationError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_PARSE
    except (ResourceError, AccuracyError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_RESOURCE
    except UsageError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_PARSE
    except QuantAutoError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
