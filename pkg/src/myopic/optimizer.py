"""Max-min power-split optimization.

The objective is the end-to-end rate ``min_t R_t``. ``grid_search`` is the
exhaustive reference: every node's window fractions range over multiples of
the resolution summing to one, and the Cartesian product is evaluated in
vectorized chunks. ``refine`` is a compass search that halves its step when
no single-coordinate move helps. ``optimize`` refines several starts and
keeps the best.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import rates
from .allocation import PowerSplit, ViewSpec, from_rows, next_hop_split, require_valid, uniform_split
from .channel import NetworkConfig
from .errors import BudgetExceededError, UsageError
from .rates import RateReport, end_to_end_rate, rate_from_sinr

log = logging.getLogger(__name__)

IMPROVEMENT_TOL = 1e-12
DEFAULT_BUDGET = 10**8
# grid cells evaluated per numpy chunk
_CHUNK_CELLS = 2_000_000


@dataclass(frozen=True)
class OptimizerOptions:
    resolution: float = 0.1
    budget: int = DEFAULT_BUDGET
    permute: bool = False
    step0: float = 0.25
    step_floor: float = 1e-4


@dataclass(frozen=True)
class OptimizationResult:
    best_split: PowerSplit
    report: RateReport
    method: str  # "grid", "refined" or "grid_then_refined"
    evaluations: int
    trace: tuple[tuple[int, float], ...] = ()
    grid_resolution: float | None = None
    start: str | None = None
    permutation: tuple[int, ...] | None = None

    @property
    def rate(self) -> float:
        return self.report.end_to_end


def _grid_steps(resolution: float) -> int:
    if not 0 < resolution <= 1:
        raise UsageError(f"resolution {resolution} must lie in (0, 1]")
    n = round(1.0 / resolution)
    if abs(n * resolution - 1.0) > 1e-9:
        raise UsageError(f"resolution {resolution} does not divide 1")
    return n


def compositions(n: int, parts: int) -> np.ndarray:
    """All tuples of ``parts`` non-negative ints summing to ``n``, lexicographic."""
    rows = []
    for bars in itertools.combinations(range(n + parts - 1), parts - 1):
        edges = (-1, *bars, n + parts - 1)
        rows.append([edges[s + 1] - edges[s] - 1 for s in range(parts)])
    rows.sort()
    return np.array(rows, dtype=np.int64).reshape(len(rows), parts)


def grid_size(view: ViewSpec, resolution: float) -> int:
    n = _grid_steps(resolution)
    return math.prod(math.comb(n + len(view.window(i)) - 1, len(view.window(i)) - 1)
                     for i in range(1, view.T))


def grid_search(view: ViewSpec, config: NetworkConfig, resolution: float = 0.1,
                budget: int = DEFAULT_BUDGET) -> OptimizationResult:
    """Exhaustive max-min search on the simplex grid.

    Ties go to the lexicographically smallest flattened split; candidates are
    enumerated in that order and a later one must be strictly better.
    """
    n = _grid_steps(resolution)
    required = grid_size(view, resolution)
    if required > budget:
        raise BudgetExceededError(required, budget)

    candidates = [compositions(n, len(view.window(i))) / n for i in range(1, view.T)]
    rest = math.prod(c.shape[0] for c in candidates[1:])
    chunk = max(1, _CHUNK_CELLS // rest)

    best_value, best_index = -math.inf, None
    for lo in range(0, candidates[0].shape[0], chunk):
        part = [candidates[0][lo:lo + chunk], *candidates[1:]]
        values = rates.min_sinr_grid(view, config, part)
        flat = int(np.argmax(values))
        if values.flat[flat] > best_value:
            best_value = float(values.flat[flat])
            idx = np.unravel_index(flat, values.shape)
            best_index = (idx[0] + lo, *idx[1:])

    split = from_rows(view, [candidates[i][best_index[i]] for i in range(view.n_layers)])
    report = end_to_end_rate(view, split, config)
    return OptimizationResult(split, report, "grid", required,
                              trace=((0, report.end_to_end),), grid_resolution=resolution)


def _window_rows(split: PowerSplit, view: ViewSpec) -> list[list[float]]:
    return [[split[i, j] for j in view.window(i)] for i in range(1, view.T)]


def refine(start: PowerSplit, view: ViewSpec, config: NetworkConfig, step0: float = 0.25,
           step_floor: float = 1e-4, max_sweeps: int = 100_000) -> OptimizationResult:
    """Derivative-free compass search on the free window coordinates.

    Each sweep tries ``+step`` then ``-step`` on every free coordinate,
    clamped to the feasible range, and keeps a move only when it raises the
    min-rate by more than ``IMPROVEMENT_TOL``. A sweep without improvement
    halves the step; the search stops once the step drops below
    ``step_floor``.
    """
    if not 0 < step_floor < step0 <= 0.5:
        raise UsageError(f"need 0 < step_floor < step0 <= 0.5, got {step_floor}, {step0}")
    require_valid(start, view)

    # remainder parameterization: slot 0 of each window row absorbs
    # 1 - sum(other slots); untouched rows keep the start's exact values
    rows = _window_rows(start, view)
    best = rate_from_sinr(rates.min_sinr(view, from_rows(view, rows), config))
    evaluations = 1
    trace = [(0, best)]
    step, sweep = step0, 0
    while step >= step_floor and sweep < max_sweeps:
        sweep += 1
        improved = False
        for row in rows:
            for s in range(1, len(row)):
                saved = row[:]
                room = 1.0 - math.fsum(row[1:s] + row[s + 1:])
                for direction in (1.0, -1.0):
                    trial = min(max(saved[s] + direction * step, 0.0), room)
                    if trial == saved[s]:
                        continue
                    row[s] = trial
                    row[0] = max(1.0 - math.fsum(row[1:]), 0.0)
                    value = rate_from_sinr(rates.min_sinr(view, from_rows(view, rows), config))
                    evaluations += 1
                    if value > best + IMPROVEMENT_TOL:
                        best, improved = value, True
                        break
                    row[:] = saved
        trace.append((sweep, best))
        if not improved:
            step /= 2.0

    split = from_rows(view, rows)
    require_valid(split, view)
    report = end_to_end_rate(view, split, config)
    return OptimizationResult(split, report, "refined", evaluations, trace=tuple(trace))


def _optimize_fixed_order(view: ViewSpec, config: NetworkConfig, options: OptimizerOptions,
                          extra_starts: Sequence[PowerSplit]) -> OptimizationResult:
    grid = grid_search(view, config, options.resolution, options.budget)
    starts = [("grid", grid.best_split), ("next_hop", next_hop_split(view)),
              ("uniform", uniform_split(view))]
    starts += [("warm", s) for s in extra_starts]

    best, evaluations = None, grid.evaluations
    for label, split in starts:
        result = refine(split, view, config, options.step0, options.step_floor)
        evaluations += result.evaluations
        # earlier starts win exact ties, so the grid-seeded result is preferred
        if best is None or result.rate > best[1].rate:
            best = (label, result)

    label, result = best
    return OptimizationResult(
        result.best_split, result.report,
        "grid_then_refined" if label == "grid" else "refined",
        evaluations, trace=result.trace, grid_resolution=options.resolution, start=label,
    )


def optimize(view: ViewSpec, config: NetworkConfig, options: OptimizerOptions | None = None,
             extra_starts: Sequence[PowerSplit] = ()) -> OptimizationResult:
    """Multi-start max-min optimization.

    Starts are the coarse grid optimum, the next-hop split, the uniform split
    and any ``extra_starts`` (e.g. the optimum for a smaller k, which stays
    feasible for larger k). With ``options.permute`` and an omniscient view
    every relay order is optimized and the best one is returned.
    """
    options = options or OptimizerOptions()
    for split in extra_starts:
        require_valid(split, view)
    if not options.permute:
        return _optimize_fixed_order(view, config, options, extra_starts)
    if not view.is_omniscient:
        log.warning("relay permutation only applies to omniscient coding; ignoring it for k=%d",
                    view.k)
        return _optimize_fixed_order(view, config, options, extra_starts)

    results: dict[tuple[float, ...], OptimizationResult] = {}
    identity = tuple(config.positions)

    def provider(relabeled: NetworkConfig) -> PowerSplit:
        warm = extra_starts if relabeled.positions == identity else ()
        res = _optimize_fixed_order(view, relabeled, options, warm)
        results[relabeled.positions] = res
        return res.best_split

    order, report = rates.omniscient_rate_with_permutation(provider, config)
    chosen = results[config.relabeled(order).positions]
    total = sum(r.evaluations for r in results.values())
    return OptimizationResult(
        chosen.best_split, report, chosen.method, total, trace=chosen.trace,
        grid_resolution=chosen.grid_resolution, start=chosen.start, permutation=order,
    )
