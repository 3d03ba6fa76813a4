"""Command-line front end.

Subcommands: ``rate``, ``optimize``, ``sweep``, ``schedule`` and ``verify``.
Exit codes: 0 success, 2 usage or configuration error, 3 grid budget
exceeded, 4 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from . import mi_oracle, pipeline
from .allocation import PowerSplit, ViewSpec, to_named_omniscient, to_named_twohop, uniform_split
from .errors import (BudgetExceededError, ConfigurationError, UnsupportedError, UsageError,
                     ValidationError)
from .optimizer import OptimizationResult, optimize
from .rates import RateReport, end_to_end_rate, reception_rate, receiver_coefficients
from .scenario import Scenario, load_scenario, preset, with_overrides

log = logging.getLogger("myopic")

EXIT_OK, EXIT_USAGE, EXIT_BUDGET, EXIT_VERIFY = 0, 2, 3, 4
VERIFY_TOL = 1e-9


def fmt(x) -> str:
    """12 significant digits, locale independent."""
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".12g")


def _csv(rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for row in rows:
        writer.writerow([c if isinstance(c, str) else fmt(c) for c in row])
    return buf.getvalue()


def _json(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


def _node_rows(report: RateReport):
    rows = [("t", "rate", "signal", "interference", "bottleneck")]
    for n in report.per_node:
        rows.append((n.t, n.rate, n.signal, n.interference, n.t == report.bottleneck))
    return rows


def _report_dict(report: RateReport) -> dict:
    return {
        "k": report.view.k,
        "end_to_end": report.end_to_end,
        "bottleneck": report.bottleneck,
        "nodes": [
            {"t": n.t, "rate": n.rate, "signal": n.signal, "interference": n.interference,
             "noise": n.noise, "signal_layers": list(n.signal_layers),
             "conditioned_layers": list(n.conditioned_layers),
             "interference_layers": list(n.interference_layers)}
            for n in report.per_node
        ],
    }


def cmd_rate(scenario: Scenario, out_format: str = "csv") -> str:
    if scenario.split is None:
        raise ConfigurationError("the rate command needs a split in the scenario")
    report = end_to_end_rate(scenario.view, scenario.split, scenario.config)
    if out_format == "json":
        return _json(_report_dict(report))
    return _csv(_node_rows(report))


def named_splits(split: PowerSplit, view: ViewSpec) -> dict[str, float] | None:
    if view.T != 5:
        return None
    if view.k == 4:
        return to_named_omniscient(split)
    if view.k == 2:
        return to_named_twohop(split)
    return None


def cmd_optimize(scenario: Scenario, out_format: str = "csv") -> str:
    view = scenario.view
    result = optimize(view, scenario.config, scenario.optimizer)
    named = named_splits(result.best_split, view)
    summary = {
        "end_to_end": result.rate,
        "bottleneck": result.report.bottleneck,
        "method": result.method,
        "start": result.start,
        "evaluations": result.evaluations,
        "grid_resolution": result.grid_resolution,
        "permutation": list(result.permutation) if result.permutation else None,
    }
    if out_format == "json":
        body = dict(summary, split=result.best_split.to_list(), named=named,
                    report=_report_dict(result.report))
        return _json(body)

    L = view.n_layers
    parts = [_csv(_node_rows(result.report))]
    parts.append(_csv([("node", *[f"layer{j}" for j in range(1, L + 1)])]
                      + [(i, *result.best_split.row(i)) for i in range(1, L + 1)]))
    kv = [("key", "value")]
    for key, value in summary.items():
        if value is None:
            continue
        kv.append((key, " ".join(map(str, value)) if isinstance(value, list) else value))
    for key, value in (named or {}).items():
        kv.append((key, value))
    parts.append(_csv(kv))
    return "\n".join(parts)


def _sweep_point(args) -> list[OptimizationResult]:
    scenario, value = args
    cfg = scenario.config
    cfg = cfg.with_powers(value) if scenario.sweep.parameter == "power_all" else cfg.with_noises(value)
    T = cfg.n_nodes
    results, warm = [], ()
    for k in range(1, T):
        res = optimize(ViewSpec(T, k), cfg, scenario.optimizer, extra_starts=warm)
        results.append(res)
        warm = (res.best_split,)
    return results


def _parallel_map(func, items, jobs: int):
    if jobs <= 1 or len(items) <= 1:
        return [func(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(func, items))


def cmd_sweep(scenario: Scenario, jobs: int = 1) -> str:
    """Optimized rate for every k at every sweep value.

    Each k is warm-started from the k-1 optimum, so rate_k is
    non-decreasing in k on every row.
    """
    if scenario.sweep is None:
        raise ConfigurationError("the sweep command needs a sweep spec")
    if not scenario.sweep.values:
        raise ConfigurationError("sweep.values is empty")
    T = scenario.config.n_nodes
    labels = [f"k{k}" for k in range(1, T - 1)] + ["omniscient"]
    header = ["value"] + [f"rate_{s}" for s in labels] + [f"bottleneck_{s}" for s in labels]
    points = _parallel_map(_sweep_point, [(scenario, v) for v in scenario.sweep.values], jobs)
    rows = [header]
    for value, results in zip(scenario.sweep.values, points):
        rows.append([value] + [r.rate for r in results] + [r.report.bottleneck for r in results])
    return _csv(rows)


def cmd_schedule(T: int, k: int, B: int, first: int = 1, last: int | None = None,
                 out_format: str = "text") -> str:
    s = pipeline.build_schedule(T, k, B)
    if out_format == "text":
        return pipeline.render_schedule(s, first, last)
    last = s.total_blocks if last is None else last
    if not 1 <= first <= last <= s.total_blocks:
        raise UsageError(f"block range {first}..{last} outside 1..{s.total_blocks}")
    body = {
        "T": T, "k": k, "B": B, "total_blocks": s.total_blocks,
        "effective_rate_factor": str(pipeline.effective_rate_factor(T, B)),
        "tx": [{"block": b, "node": i, "sends": [list(p) for p in s.tx[b, i]]}
               for b in range(first, last + 1) for i in range(1, T)],
        "decode_window": [{"node": t, "message": m, "first": lo, "last": hi}
                          for (t, m), (lo, hi) in sorted(s.decode_window.items())],
    }
    return _json(body)


@dataclass(frozen=True)
class TrialOutcome:
    trial: int
    node: int
    rel_error: float
    closed_form: float
    oracle: float
    split: PowerSplit


def trial_split(scenario: Scenario, seed: int, trial: int) -> PowerSplit:
    """Random feasible split: the scenario split mixed with a Dirichlet draw."""
    view = scenario.view
    rng = np.random.default_rng([seed, trial])
    base = (scenario.split or uniform_split(view)).matrix
    weight = rng.uniform()
    m = np.zeros_like(base)
    for i in range(1, view.T):
        w = view.window(i)
        draw = rng.dirichlet(np.ones(len(w)))
        cols = slice(w.start - 1, w.stop - 1)
        row = (1.0 - weight) * base[i - 1, cols] + weight * draw
        m[i - 1, cols] = row / row.sum()
    return PowerSplit(m)


def _verify_trials(args) -> list[TrialOutcome]:
    scenario, seed, trials = args
    view, config = scenario.view, scenario.config
    out = []
    for trial in trials:
        split = trial_split(scenario, seed, trial)
        worst = None
        for t in range(2, view.T + 1):
            closed = reception_rate(t, view, split, config)
            model = mi_oracle.JointGaussianModel(
                receiver_coefficients(t, view, split, config), config.noise(t))
            oracle = mi_oracle.conditional_mi(
                view.signal_layers(t), view.conditioned_layers(t), model)
            err = abs(closed - oracle) / max(closed, 1e-12)
            if worst is None or err > worst.rel_error:
                worst = TrialOutcome(trial, t, err, closed, oracle, split)
        out.append(worst)
    return out


def run_verify(scenario: Scenario, trials: int, seed: int, jobs: int = 1) -> list[TrialOutcome]:
    if trials < 1:
        raise UsageError("verify needs at least one trial")
    chunks = [range(lo, min(lo + 100, trials)) for lo in range(0, trials, 100)]
    parts = _parallel_map(_verify_trials, [(scenario, seed, c) for c in chunks], jobs)
    return [o for part in parts for o in part]


def cmd_verify(scenario: Scenario, trials: int, seed: int, jobs: int = 1,
               out_format: str = "csv") -> tuple[str, int, Scenario | None]:
    outcomes = run_verify(scenario, trials, seed, jobs)
    worst = max(outcomes, key=lambda o: (o.rel_error, -o.trial))
    ok = worst.rel_error < VERIFY_TOL
    summary = {
        "trials": trials, "seed": seed, "k": scenario.k,
        "max_rel_error": worst.rel_error, "worst_trial": worst.trial, "worst_node": worst.node,
        "tolerance": VERIFY_TOL, "status": "pass" if ok else "fail",
    }
    failing = None if ok else replace(scenario, split=worst.split)
    text = _json(summary) if out_format == "json" else _csv(
        [("key", "value")] + [(key, v) for key, v in summary.items()])
    return text, EXIT_OK if ok else EXIT_VERIFY, failing


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="myopic", description="Decode-forward rates for myopic and omniscient relaying.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def scenario_args(p, formats=("csv", "json")):
        src = p.add_mutually_exclusive_group(required=True)
        src.add_argument("--scenario", type=Path, help="scenario JSON file")
        src.add_argument("--preset", help="equal_spacing_5 or node2_close_5")
        p.add_argument("--k", type=int, help="override the hop count")
        p.add_argument("--resolution", type=float, help="grid step (must divide 1)")
        p.add_argument("--budget", type=int, help="max grid evaluations")
        p.add_argument("--permute", action="store_true", default=None,
                       help="also search relay orders (omniscient only)")
        p.add_argument("--format", choices=formats, default=formats[0])
        p.add_argument("--out", type=Path, help="write output here instead of stdout")

    scenario_args(sub.add_parser("rate", help="evaluate the scenario's split"))
    scenario_args(sub.add_parser("optimize", help="maximize the end-to-end rate"))
    p = sub.add_parser("sweep", help="optimized rates for every k across a sweep")
    scenario_args(p, formats=("csv",))
    p.add_argument("--jobs", type=int, default=1)
    p = sub.add_parser("verify", help="closed form vs. covariance oracle")
    scenario_args(p)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--dump", type=Path, default=Path("verify_failure.json"),
                   help="where to write the failing instance")
    p = sub.add_parser("schedule", help="block-Markov transmission table")
    p.add_argument("--nodes", "-T", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--blocks", "-B", type=int, required=True, help="number of messages B")
    p.add_argument("--first", type=int, default=1)
    p.add_argument("--last", type=int)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--out", type=Path)
    return parser


def _scenario_from_args(args) -> Scenario:
    scenario = load_scenario(args.scenario) if args.scenario else preset(args.preset)
    return with_overrides(scenario, k=args.k, resolution=args.resolution,
                          budget=args.budget, permute=args.permute)


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def main(argv: Sequence[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "schedule":
            text = cmd_schedule(args.nodes, args.k, args.blocks, args.first, args.last,
                                args.format)
            _emit(text, args.out)
            return EXIT_OK
        scenario = _scenario_from_args(args)
        if args.command == "rate":
            text = cmd_rate(scenario, args.format)
        elif args.command == "optimize":
            text = cmd_optimize(scenario, args.format)
        elif args.command == "sweep":
            text = cmd_sweep(scenario, args.jobs)
        else:
            text, code, failing = cmd_verify(scenario, args.trials, args.seed, args.jobs,
                                             args.format)
            _emit(text, args.out)
            if failing is not None:
                args.dump.write_text(_json(failing.to_dict()))
                print(f"verification failed; instance written to {args.dump}", file=sys.stderr)
            return code
        _emit(text, args.out)
        return EXIT_OK
    except BudgetExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (ConfigurationError, UsageError, ValidationError, UnsupportedError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
