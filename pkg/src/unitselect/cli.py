"""Command-line front end.

Exit codes: 0 success, 2 validation failure, 3 search budget exhausted,
4 rejection cap hit, 64 usage or parse error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from .core import (
    DatasetError,
    Interval,
    UnitSelectionError,
    format_decimal,
    load_dataset,
    to_rational,
    validate,
)
from .engine import BudgetExceeded, EngineConfig, bound_benefit, identify
from .lp import Infeasible, oracle_benefit_bounds, oracle_query_bounds
from .pcbounds import BoundsEvaluator, CounterfactualQuery
from .sim import RejectionCapExceeded, SimConfig, STUDY_VECTORS, run_study, summary_json, write_records_csv

EXIT_OK, EXIT_INVALID, EXIT_BUDGET, EXIT_REJECTIONS, EXIT_USAGE = 0, 2, 3, 4, 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _exact(value: Fraction, precision: int) -> dict:
    return {"exact": str(value), "decimal": format_decimal(value, precision)}


def _interval(iv: Interval, precision: int) -> dict:
    return {"lower": _exact(iv.lower, precision), "upper": _exact(iv.upper, precision)}


def _load(path, *, need_benefit=False, need_valid=False):
    ds = load_dataset(path)
    if need_benefit and ds.benefit is None:
        raise UsageError(f"{path}: dataset has no benefit_vector")
    if need_valid:
        report = validate(ds.exp, ds.obs)
        if not report.ok:
            return ds, report
    return ds, None


def _print_violations(report, out):
    for v in report.violations:
        where = ""
        if v.treatment is not None:
            where += f" x{v.treatment}"
        if v.outcome is not None:
            where += f" y{v.outcome}"
        out.append(f"violation: {v.constraint}{where} slack {v.slack} ({format_decimal(v.slack, 6)})")


def _engine(args) -> EngineConfig:
    return EngineConfig(max_states=args.max_states)


# ---------------------------------------------------------------------------
# Commands. Each returns (exit code, printable lines, machine-readable result).
# ---------------------------------------------------------------------------

def cmd_validate(args):
    ds, _ = _load(args.dataset)
    report = validate(ds.exp, ds.obs)
    lines = [f"{args.dataset}: {'ok' if report.ok else 'INVALID'}"]
    _print_violations(report, lines)
    result = {"ok": report.ok, "violations": [
        {"constraint": v.constraint, "treatment": v.treatment, "outcome": v.outcome, "slack": str(v.slack)}
        for v in report.violations]}
    return (EXIT_OK if report.ok else EXIT_INVALID), lines, result


def cmd_identify(args):
    ds, _ = _load(args.dataset, need_benefit=True)
    res = identify(ds.benefit, ds.exp, _engine(args))
    if res.identifiable:
        lines = [f"identifiable: yes, value = {res.value} ({format_decimal(res.value, args.precision)})"]
    else:
        lines = ["identifiable: no"]
    if args.trace:
        lines += [f"  {s}" for s in res.steps]
    result = {"identifiable": res.identifiable, "states": res.states}
    if res.identifiable:
        result["value"] = _exact(res.value, args.precision)
    return EXIT_OK, lines, result


def cmd_bounds(args):
    ds, report = _load(args.dataset, need_benefit=True, need_valid=True)
    if report is not None:
        lines = [f"{args.dataset}: data fail validation"]
        _print_violations(report, lines)
        return EXIT_INVALID, lines, {"ok": False}
    res = bound_benefit(ds.benefit, ds.exp, ds.obs, _engine(args))
    p = args.precision
    lines = [f"{format_decimal(res.lower, p)} ≤ f(c) ≤ {format_decimal(res.upper, p)}",
             f"exact: [{res.lower}, {res.upper}]"]
    result = {"bounds": _interval(res.interval, p), "partial": res.partial, "states": res.states}
    if res.partial:
        lines.append("note: search budget exhausted, interval is valid but possibly loose")
    if args.trace:
        lines.append("lower bound reductions:")
        lines += [f"  {s}" for s in res.lower_steps] or ["  (none)"]
        lines.append("upper bound reductions:")
        lines += [f"  {s}" for s in res.upper_steps] or ["  (none)"]
    if args.oracle:
        oracle = oracle_benefit_bounds(ds.benefit, ds.exp, ds.obs)
        verdict = "ok" if res.interval.contains(oracle) else "VIOLATED"
        lines.append(f"oracle: {oracle.format(p)} exact [{oracle.lower}, {oracle.upper}]; containment {verdict}")
        result["oracle"] = _interval(oracle, p)
        result["containment"] = verdict
    return EXIT_OK, lines, result


def cmd_oracle(args):
    args.oracle = True
    return cmd_bounds(args)


def _parse_pairs(text: str):
    try:
        pairs = []
        for part in text.split(","):
            j, i = part.split(":")
            pairs.append((int(j), int(i)))
        return tuple(pairs)
    except ValueError as exc:
        raise UsageError(f"bad --pairs {text!r}; expected 'j:i,j:i' (treatment:outcome)") from exc


def cmd_pc_bound(args):
    ds, report = _load(args.dataset, need_valid=True)
    if report is not None:
        lines = [f"{args.dataset}: data fail validation"]
        _print_violations(report, lines)
        return EXIT_INVALID, lines, {"ok": False}
    try:
        query = CounterfactualQuery(_parse_pairs(args.pairs), args.x, args.y)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    ev = BoundsEvaluator(ds.exp, ds.obs, validate=False)
    try:
        iv = ev.bound(query)
    except IndexError as exc:
        raise UsageError(str(exc)) from exc
    lines = [f"{format_decimal(iv.lower, args.precision)} ≤ {query} ≤ {format_decimal(iv.upper, args.precision)}",
             f"exact: [{iv.lower}, {iv.upper}]"]
    result = {"query": str(query), "bounds": _interval(iv, args.precision)}
    if args.oracle:
        oracle = oracle_query_bounds(query, ds.exp, ds.obs)
        verdict = "ok" if iv.contains(oracle) else "VIOLATED"
        lines.append(f"oracle: {oracle.format(args.precision)}; containment {verdict}")
        result["oracle"] = _interval(oracle, args.precision)
        result["containment"] = verdict
    return EXIT_OK, lines, result


def _parse_vector(text: str):
    if text in STUDY_VECTORS:
        return tuple(Fraction(v) for v in STUDY_VECTORS[text])
    try:
        return tuple(to_rational(v) for v in text.split(","))
    except (ValueError, TypeError) as exc:
        raise UsageError(f"bad --vector {text!r}") from exc


def cmd_simulate(args):
    vector = _parse_vector(args.vector)
    if len(vector) != 9:
        raise UsageError(f"--vector needs 9 entries for m=2, n=3, got {len(vector)}")
    if args.count < 1:
        raise UsageError("--count must be at least 1")
    cfg = SimConfig(vector=vector, count=args.count, seed=args.seed,
                    workers=args.workers, engine=_engine(args))
    records, summary = run_study(cfg)
    doc = summary_json(summary, args.precision)
    if args.out:
        write_records_csv(records, args.out, args.precision, limit=args.rows or None)
    if args.summary:
        Path(args.summary).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    lines = [json.dumps(doc, indent=2)]
    return EXIT_OK, lines, doc


def _rank_key(entry):
    iv = entry["interval"]
    return (-iv.lower, -iv.midpoint, entry["path"])


def cmd_rank(args):
    entries = []
    first = None
    for path in args.datasets:
        ds, report = _load(path, need_benefit=True, need_valid=True)
        if report is not None:
            lines = [f"{path}: data fail validation"]
            _print_violations(report, lines)
            return EXIT_INVALID, lines, {"ok": False}
        if first is None:
            first = ds
        elif (ds.m, ds.n) != (first.m, first.n):
            raise UsageError(f"{path}: shape {ds.m}x{ds.n} differs from {first.m}x{first.n}")
        elif ds.benefit.vector != first.benefit.vector:
            raise UsageError(f"{path}: benefit vectors differ; ranking needs one shared vector")
        cfg = _engine(args)
        ident = identify(ds.benefit, ds.exp, cfg)
        if ident.identifiable:
            iv = Interval(ident.value, ident.value)
        else:
            iv = bound_benefit(ds.benefit, ds.exp, ds.obs, cfg).interval
        entries.append({"path": str(path), "interval": iv, "identifiable": ident.identifiable})
    entries.sort(key=_rank_key)
    p = args.precision
    lines, result = [], []
    for rank, e in enumerate(entries, start=1):
        iv = e["interval"]
        shown = format_decimal(iv.lower, p) if e["identifiable"] else iv.format(p)
        lines.append(f"{rank}. {e['path']}: {shown}")
        result.append({"rank": rank, "path": e["path"], "identifiable": e["identifiable"],
                       "bounds": _interval(iv, p)})
    return EXIT_OK, lines, {"ranking": result}


def cmd_replay(args):
    try:
        manifest = json.loads(Path(args.manifest_file).read_text(encoding="utf-8"))
        argv = manifest["argv"]
    except (OSError, ValueError, KeyError) as exc:
        raise UsageError(f"cannot read manifest: {exc}") from exc
    code, _, result = run(argv)
    same = code == manifest["exit_code"] and result == manifest["outputs"]
    return (EXIT_OK if same else 1), [f"replay {'identical' if same else 'DIFFERS'}"], {"identical": same}


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="print the machine-readable result")
    common.add_argument("--manifest", metavar="PATH", help="write a replayable run manifest")
    common.add_argument("--precision", type=int, default=None,
                        help="decimal places in printed values (default 3; 6 for simulate)")
    common.add_argument("--max-states", type=int, default=10**7, help="search state budget")

    parser = _Parser(prog="unitselect", description="Bounds on nonbinary unit-selection benefit functions.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help):
        p = sub.add_parser(name, help=help, parents=[common])
        p.set_defaults(func=func)
        return p

    p = add("validate", cmd_validate, "check a dataset against the general relation")
    p.add_argument("dataset")

    p = add("identify", cmd_identify, "test identifiability from experimental data")
    p.add_argument("dataset")
    p.add_argument("--trace", action="store_true", help="print the reductions that zero every term")

    for name, func, text in (("bounds", cmd_bounds, "bound the benefit function"),
                             ("oracle", cmd_oracle, "compare bounds with the exact LP range")):
        p = add(name, func, text)
        p.add_argument("dataset")
        p.add_argument("--oracle", action="store_true", help="also solve the canonical LP")
        p.add_argument("--trace", action="store_true", help="print the reductions behind each bound")

    p = add("pc-bound", cmd_pc_bound, "bound one probability of causation")
    p.add_argument("dataset")
    p.add_argument("--pairs", required=True, help="counterfactual pairs as 'j:i,...' meaning Y_{x_j}=y_i")
    p.add_argument("--x", type=int, help="observed treatment index")
    p.add_argument("--y", type=int, help="observed outcome index")
    p.add_argument("--oracle", action="store_true")

    p = add("simulate", cmd_simulate, "run the simulated-population study (m=2, n=3)")
    p.add_argument("--vector", default="benefited-minus-harmed",
                   help="comma-separated benefit vector or one of: " + ", ".join(STUDY_VECTORS))
    p.add_argument("--count", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", metavar="CSV", help="per-population records")
    p.add_argument("--rows", type=int, default=100, help="CSV rows to keep (0 = all)")
    p.add_argument("--summary", metavar="JSON", help="write the summary JSON here")
    p.add_argument("--workers", type=int, default=1)

    p = add("rank", cmd_rank, "order populations by their benefit bounds")
    p.add_argument("datasets", nargs="+")

    p = add("replay", cmd_replay, "re-run a manifest and compare outputs")
    p.add_argument("manifest_file", metavar="manifest")
    return parser


def run(argv):
    """Parse and execute; returns (exit code, lines, machine-readable result)."""
    args = build_parser().parse_args(argv)
    if args.precision is None:
        args.precision = 6 if args.command == "simulate" else 3
    try:
        return args.func(args)
    except (DatasetError, UsageError, OSError) as exc:
        return EXIT_USAGE, [f"error: {exc}"], {"error": str(exc)}
    except BudgetExceeded as exc:
        return EXIT_BUDGET, [f"error: {exc}"], {"error": str(exc)}
    except RejectionCapExceeded as exc:
        return EXIT_REJECTIONS, [f"error: {exc}"], {"error": str(exc)}
    except Infeasible as exc:
        return EXIT_INVALID, [f"error: {exc}"], {"error": str(exc)}
    except UnitSelectionError as exc:
        return EXIT_USAGE, [f"error: {exc}"], {"error": str(exc)}


def _inputs(argv):
    found = []
    for arg in argv:
        path = Path(arg)
        if path.is_file():
            found.append({"path": arg, "sha256": hashlib.sha256(path.read_bytes()).hexdigest()})
    return found


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    code, lines, result = run(argv)
    stream = sys.stdout if code in (EXIT_OK, EXIT_INVALID) else sys.stderr
    if args.json:
        print(json.dumps(result, indent=2), file=stream)
    else:
        for line in lines:
            print(line, file=stream)
    manifest_path = args.manifest
    if manifest_path:
        replay_argv = _strip_manifest(argv)
        manifest = {
            "tool": "unitselect", "version": __version__, "command": replay_argv[0] if replay_argv else None,
            "argv": replay_argv, "inputs": _inputs(replay_argv), "exit_code": code, "outputs": result,
        }
        Path(manifest_path).write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return code


def _strip_manifest(argv):
    out, skip = [], False
    for arg in argv:
        if skip:
            skip = False
            continue
        if arg == "--manifest":
            skip = True
            continue
        if arg.startswith("--manifest="):
            continue
        out.append(arg)
    return out


if __name__ == "__main__":
    sys.exit(main())
