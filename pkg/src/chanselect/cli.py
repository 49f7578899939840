"""Command-line entry point.

Subcommands: bnb, greedy, exhaustive, alpha-sweep, eval-subset. Results are
machine-readable JSON (or CSV for alpha-sweep); channel names, never indices,
appear in output. Exit codes: 0 success, 1 error, 2 no feasible subset.
"""
from __future__ import annotations

import argparse
import json
import shlex
import sys
import time

from .bnb import BnbOutcome, branch_and_bound
from .errors import ChanselectError
from .evaluators import (
    ExternalEvaluator,
    ExternalEvaluatorConfig,
    PerformanceFunction,
    SyntheticMonotoneFunction,
    TableOracle,
    train_centroid,
)
from .exhaustive import ExhaustiveOutcome, exhaustive_search
from .greedy import GreedyOutcome, alpha_sweep, alpha_sweep_csv, greedy_select
from .model import (
    ChannelSet,
    CostModel,
    Direction,
    EvaluatedSubset,
    ScoreParams,
    equal_costs,
    evaluate_subset,
    load_cost_model_csv,
)
from .windowing import DatasetSchema, SplitSpec, extract_features, load_csv, window_signal

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INFEASIBLE = 2


def load_table_oracle(path) -> tuple[list[str], TableOracle]:
    """Table evaluator file: {"channels":[names],"default":x|null,
    "entries":[{"channels":[names],"performance":y}],"claims_monotone":bool}."""
    with open(path) as fh:
        doc = json.load(fh)
    names = list(doc["channels"])
    entries = {}
    for item in doc.get("entries", []):
        key = ChannelSet.from_names(item["channels"], names)
        entries[key] = float(item["performance"])
    oracle = TableOracle(
        n=len(names),
        entries=entries,
        default=doc.get("default"),
        claims_monotone=bool(doc.get("claims_monotone", False)),
    )
    return names, oracle


def _build_evaluator(args) -> tuple[list[str], PerformanceFunction]:
    """Resolve the evaluator choice to (channel names, evaluator)."""
    spec = args.evaluator
    if spec == "synthetic":
        if args.n is None:
            raise ChanselectError("--n is required with the synthetic evaluator")
        names = [f"c{i}" for i in range(args.n)]
        return names, SyntheticMonotoneFunction.random(
            args.n, args.seed, args.utility_low, args.utility_high
        )
    if spec.startswith("table:"):
        return load_table_oracle(spec[len("table:") :])
    if spec == "centroid":
        if not args.dataset or not args.data:
            raise ChanselectError("--dataset and --data are required with the centroid evaluator")
        schema = DatasetSchema.from_json(args.dataset)
        rec = load_csv(args.data, schema)
        windows = window_signal(rec, schema.window_seconds, schema.overlap_seconds)
        featureset = extract_features(windows)
        split = SplitSpec(train_fraction=args.train_fraction, seed=args.split_seed)
        return list(schema.channel_columns), train_centroid(featureset, split)
    if spec.startswith("external:"):
        command = shlex.split(spec[len("external:") :])
        if args.channels:
            names = [c.strip() for c in args.channels.split(",")]
        elif args.cost_model != "equal":
            names, _ = load_cost_model_csv(args.cost_model)
        else:
            raise ChanselectError(
                "external evaluator needs channel names: pass --channels or a cost-model CSV"
            )
        config = ExternalEvaluatorConfig(
            command=command, channel_names=names, task=args.task, timeout=args.timeout
        )
        return names, ExternalEvaluator(config)
    raise ChanselectError(f"unknown evaluator spec: {spec!r}")


def _build_cost_model(args, names: list[str]) -> CostModel:
    if args.cost_model == "equal":
        return equal_costs(len(names))
    csv_names, model = load_cost_model_csv(args.cost_model)
    if csv_names != names:
        raise ChanselectError(
            "cost model channels do not match the evaluator's channel universe"
        )
    return model


def _config_dict(args) -> dict:
    keys = (
        "command",
        "evaluator",
        "cost_model",
        "lam",
        "alpha",
        "direction",
        "n",
        "seed",
        "utility_low",
        "utility_high",
    )
    return {k: getattr(args, k, None) for k in keys}


def _entry_dict(e: EvaluatedSubset, names: list[str], with_savings: bool = False) -> dict:
    doc = {
        "channels": e.subset.names(names),
        "performance": e.performance,
        "cost": e.cost,
        "score": e.score,
    }
    if with_savings:
        doc["savings"] = 1.0 - e.cost
    return doc


def outcome_document(outcome, names: list[str], config: dict, deterministic: bool) -> dict:
    if isinstance(outcome, BnbOutcome):
        stats = {
            "evaluations": outcome.stats.evaluations,
            "nodes_pruned_infeasible": outcome.stats.nodes_pruned_infeasible,
            "nodes_skipped_visited": outcome.stats.nodes_skipped_visited,
            "max_stack_depth": outcome.stats.max_stack_depth,
            "heuristic": outcome.heuristic,
        }
        best = outcome.best
        feasible = outcome.feasible
        found = best is not None
    elif isinstance(outcome, GreedyOutcome):
        stats = {
            "evaluations": outcome.evaluations,
            "root_feasible": outcome.root_feasible,
            "path_length": len(outcome.path),
        }
        best = outcome.best if outcome.root_feasible else None
        feasible = outcome.path if outcome.root_feasible else []
        found = outcome.root_feasible
    elif isinstance(outcome, ExhaustiveOutcome):
        stats = {"evaluations": outcome.evaluations}
        best = outcome.best
        feasible = outcome.feasible
        found = best is not None
    else:  # pragma: no cover
        raise TypeError(type(outcome))
    # inline the per-entry dict: feasible lists can hold hundreds of
    # thousands of subsets and the helper call adds up
    feasible_docs = []
    append = feasible_docs.append
    for e in feasible:
        append(
            {
                "channels": e.subset.names(names),
                "performance": e.performance,
                "cost": e.cost,
                "score": e.score,
            }
        )
    doc = {
        "config": config,
        "best": _entry_dict(best, names, with_savings=True) if best else None,
        "feasible": feasible_docs,
        "stats": stats,
        "feasible_found": found,
    }
    if not deterministic:
        doc["generated_at"] = time.strftime("%Y-%m-%dT%H:%M:%S%z")
    return doc


def serialize_document(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"


def _write_output(text: str, path):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _parse_alphas(text: str) -> list[float]:
    return [float(part) for part in text.split(",") if part.strip()]


def cmd_search(args) -> int:
    names, evaluator = _build_evaluator(args)
    model = _build_cost_model(args, names)
    n = len(names)
    direction = Direction(args.direction)
    params = ScoreParams(alpha=args.alpha, lam=args.lam, direction=direction)
    trace = [] if getattr(args, "trace", None) else None
    if args.command == "bnb":
        outcome = branch_and_bound(
            n, model, evaluator, args.lam, params, trace=trace, channel_names=names
        )
    elif args.command == "greedy":
        outcome = greedy_select(n, model, evaluator, args.lam, params)
    else:
        outcome = exhaustive_search(n, model, evaluator, args.lam, params)
    if isinstance(evaluator, ExternalEvaluator):
        evaluator.close()
    if trace is not None:
        with open(args.trace, "w") as fh:
            for entry in trace:
                fh.write(json.dumps(entry, sort_keys=True, separators=(",", ":")) + "\n")
    doc = outcome_document(outcome, names, _config_dict(args), args.deterministic)
    _write_output(serialize_document(doc), args.output)
    return EXIT_OK if doc["feasible_found"] else EXIT_INFEASIBLE


def cmd_alpha_sweep(args) -> int:
    names, evaluator = _build_evaluator(args)
    model = _build_cost_model(args, names)
    alphas = _parse_alphas(args.alphas)
    for alpha in alphas:
        if not 0.0 <= alpha <= 1.0:
            raise ChanselectError(f"alpha {alpha} outside [0,1]")
    direction = Direction(args.direction)
    results = alpha_sweep(len(names), model, evaluator, args.lam, alphas, direction)
    if isinstance(evaluator, ExternalEvaluator):
        evaluator.close()
    _write_output(alpha_sweep_csv(results, names), args.output)
    return EXIT_OK


def cmd_eval_subset(args) -> int:
    names, evaluator = _build_evaluator(args)
    model = _build_cost_model(args, names)
    subset = ChannelSet.from_names(
        [c.strip() for c in args.subset.split(",") if c.strip()], names
    )
    direction = Direction(args.direction)
    params = ScoreParams(alpha=args.alpha, lam=args.lam, direction=direction)
    perf = evaluator.evaluate(subset)
    if isinstance(evaluator, ExternalEvaluator):
        evaluator.close()
    entry = evaluate_subset(subset, perf, model, params)
    doc = _entry_dict(entry, names, with_savings=True)
    _write_output(json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n", args.output)
    return EXIT_OK


def _add_common(parser: argparse.ArgumentParser):
    parser.add_argument(
        "--evaluator",
        required=True,
        help="synthetic | centroid | table:<path> | external:<command>",
    )
    parser.add_argument("--cost-model", dest="cost_model", default="equal",
                        help="'equal' or a channel,raw_cost CSV path")
    parser.add_argument("--lambda", dest="lam", type=float, required=True,
                        help="performance lower bound")
    parser.add_argument("--alpha", type=float, default=0.5)
    parser.add_argument("--direction", choices=["maximize", "minimize"], default="maximize")
    parser.add_argument("--output", default=None, help="output path (default stdout)")
    parser.add_argument("--deterministic", action="store_true",
                        help="omit timestamps so identical runs are byte-identical")
    # synthetic evaluator
    parser.add_argument("--n", type=int, default=None, help="channel count (synthetic)")
    parser.add_argument("--seed", type=int, default=0, help="utility seed (synthetic)")
    parser.add_argument("--utility-low", dest="utility_low", type=float, default=0.2)
    parser.add_argument("--utility-high", dest="utility_high", type=float, default=0.9)
    # centroid evaluator
    parser.add_argument("--dataset", default=None, help="dataset descriptor JSON (centroid)")
    parser.add_argument("--data", default=None, help="time-series CSV (centroid)")
    parser.add_argument("--train-fraction", dest="train_fraction", type=float, default=0.7)
    parser.add_argument("--split-seed", dest="split_seed", type=int, default=0)
    # external evaluator
    parser.add_argument("--channels", default=None, help="comma-separated names (external)")
    parser.add_argument("--task", default="", help="task label for the handshake (external)")
    parser.add_argument("--timeout", type=float, default=300.0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chanselect",
        description="Minimum-cost sensor channel subset selection",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("bnb", "branch-and-bound search (globally optimal under monotonicity)"),
        ("greedy", "greedy backward elimination by score"),
        ("exhaustive", "brute-force enumeration (n <= 20)"),
    ):
        p = sub.add_parser(name, help=help_text)
        _add_common(p)
        if name == "bnb":
            p.add_argument("--trace", default=None, help="write a JSON-lines node log here")
        p.set_defaults(func=cmd_search)
    p = sub.add_parser("alpha-sweep", help="greedy search across an alpha grid, CSV output")
    _add_common(p)
    p.add_argument("--alphas", required=True, help="comma-separated alpha grid")
    p.set_defaults(func=cmd_alpha_sweep)
    p = sub.add_parser("eval-subset", help="evaluate one named subset")
    _add_common(p)
    p.add_argument("--subset", required=True, help="comma-separated channel names")
    p.set_defaults(func=cmd_eval_subset)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ChanselectError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
