"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line."""

import io
import csv
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from conftest import record_criterion
from reference import (alpha_by_receiver, onehop_rate_literal, omniscient_rate_literal,
                       random_instance, theorem_sets)

from myopic import ViewSpec, grid_search, optimize, reception_rate
from myopic.allocation import next_hop_split, to_named_omniscient
from myopic.cli import cmd_sweep, cmd_verify
from myopic.mi_oracle import JointGaussianModel, conditional_mi, monte_carlo_mi
from myopic.pipeline import build_schedule, effective_rate_factor, verify_schedule
from myopic.rates import receiver_coefficients
from myopic.scenario import Sweep, preset

pytestmark = pytest.mark.acceptance


def optimize_all_k(config, T=5):
    """Optimized rates for k = 1..T-1, each warm-started from the previous k."""
    out, warm = {}, ()
    for k in range(1, T):
        res = optimize(ViewSpec(T, k), config, extra_starts=warm)
        out[k], warm = res, (res.best_split,)
    return out


@pytest.mark.slow
def test_criterion_01_oracle_equivalence():
    rng = np.random.default_rng(101)
    start = time.perf_counter()
    worst, checked = 0.0, 0
    for _ in range(1000):
        view, split, config = random_instance(rng)
        for t in range(2, view.T + 1):
            closed = reception_rate(t, view, split, config)
            decoded, known = theorem_sets(t, view.k, view.T)
            model = JointGaussianModel(receiver_coefficients(t, view, split, config),
                                       config.noise(t))
            oracle = conditional_mi(decoded, known, model)
            worst = max(worst, abs(closed - oracle) / max(closed, 1e-12))
            checked += 1
    elapsed = time.perf_counter() - start
    ok = worst < 1e-9 and elapsed < 30
    record_criterion(1, "closed form matches covariance oracle", ok,
                     f"1000 instances, {checked} receivers, max rel err {worst:.2e}, {elapsed:.1f}s")
    assert ok


def test_criterion_02_omniscient_reduction():
    rng = np.random.default_rng(202)
    worst = 0.0
    for _ in range(500):
        T = int(rng.integers(2, 7))
        view, split, config = random_instance(rng, T=T, k=T - 1)
        alpha = alpha_by_receiver(split, T)
        for t in range(2, T + 1):
            worst = max(worst, abs(reception_rate(t, view, split, config)
                                   - omniscient_rate_literal(t, alpha, config)))
    ok = worst < 1e-12
    record_criterion(2, "k=T-1 equals the omniscient literal formula", ok,
                     f"500 instances, max abs err {worst:.2e}")
    assert ok


def test_criterion_03_onehop_reduction():
    rng = np.random.default_rng(303)
    worst = 0.0
    for _ in range(500):
        T = int(rng.integers(2, 7))
        view, _, config = random_instance(rng, T=T, k=1)
        split = next_hop_split(view)  # the only feasible one-hop split
        for t in range(2, T + 1):
            worst = max(worst, abs(reception_rate(t, view, split, config)
                                   - onehop_rate_literal(t, config)))
    ok = worst < 1e-12
    record_criterion(3, "k=1 equals the one-hop literal formula", ok,
                     f"500 instances, max abs err {worst:.2e}")
    assert ok


def test_criterion_04_grid_nesting():
    lines, ok = [], True
    for name in ("equal_spacing_5", "node2_close_5"):
        config = preset(name).config
        values = [grid_search(ViewSpec(5, k), config, 0.1).rate for k in range(1, 5)]
        ok &= all(a <= b for a, b in zip(values, values[1:]))
        lines.append(f"{name}: " + " <= ".join(f"{v:.6f}" for v in values))
    record_criterion(4, "grid-only rates nest in k", ok, "; ".join(lines))
    assert ok


def _named_check(name, keys):
    found, ok = [], True
    for p in (0.1, 1.0, 10.0):
        scenario = preset(name, power=p, noise=1.0, k=4)
        named = to_named_omniscient(optimize(scenario.view, scenario.config).best_split)
        worst = max(named[key] for key in keys)
        ok &= worst <= 0.05
        found.append(f"P/N={p:g}: max {worst:.3g}")
    return ok, "; ".join(found)


def test_criterion_05_equal_spacing_zero_splits():
    ok, detail = _named_check("equal_spacing_5", ("alpha1", "beta1", "gamma1", "beta2"))
    record_criterion(5, "equal spacing: alpha1, beta1, gamma1, beta2 <= 0.05", ok, detail)
    assert ok


def test_criterion_06_node2_close_zero_splits():
    ok, detail = _named_check("node2_close_5", ("alpha1", "beta1", "alpha2", "beta2"))
    record_criterion(6, "node 2 closer: alpha1, beta1, alpha2, beta2 <= 0.05", ok, detail)
    assert ok


def _gap(p):
    rates = optimize_all_k(preset("node2_close_5", power=p).config)
    omni, twohop = rates[4].rate, rates[2].rate
    return (omni - twohop) / omni


def test_criterion_07_low_snr_closeness():
    low, high = _gap(0.01), _gap(10.0)
    ok = low < high and low < 0.05
    record_criterion(7, "two-hop close to omniscient at low SNR", ok,
                     f"gap {low:.3%} at P/N=0.01, {high:.3%} at P/N=10")
    assert ok


def test_criterion_08_onehop_penalty():
    rates = optimize_all_k(preset("node2_close_5", power=1.0).config)
    r1, r2, r_omni = rates[1].rate, rates[2].rate, rates[4].rate
    ok = r2 - r1 > 0.25 * (r_omni - r1)
    record_criterion(8, "two-hop recovers > 25% of the one-hop shortfall", ok,
                     f"R1={r1:.5f}, R2={r2:.5f}, Romni={r_omni:.5f}, "
                     f"share {(r2 - r1) / (r_omni - r1):.3f}")
    assert ok


def test_criterion_09_pipeline():
    failures, count = 0, 0
    for T in range(2, 9):
        for k in range(1, T):
            for B in range(1, 51):
                failures += bool(verify_schedule(build_schedule(T, k, B)))
                count += 1
    factor_ok = effective_rate_factor(5, 100) == Fraction(100, 103)

    rng = np.random.default_rng(909)
    s = build_schedule(5, 2, 50)
    window_ok = True
    for _ in range(20):
        t, m = int(rng.integers(2, 6)), int(rng.integers(1, 51))
        # two-block decoding: w^m at node t uses blocks m+t-3 and m+t-2
        expected = (max(1, m + t - 3), m + t - 2)
        window_ok &= s.decode_window[t, m] == expected
    ok = failures == 0 and factor_ok and window_ok
    record_criterion(9, "block-Markov schedules verify", ok,
                     f"{count} schedules, {failures} failing, 100/103 exact: {factor_ok}, "
                     f"20 two-hop windows: {window_ok}")
    assert ok


def test_criterion_10_determinism():
    sweep = preset("node2_close_5")
    sweep = type(sweep)(sweep.config, sweep.k, sweep.split, Sweep("power_all", (0.1, 1.0, 10.0)),
                        sweep.optimizer)
    runs = [cmd_sweep(sweep, jobs) for jobs in (1, 1, 2)]
    verify = preset("equal_spacing_5", k=2)
    checks = [cmd_verify(verify, 300, 7, jobs)[0] for jobs in (1, 1, 2)]
    ok = len(set(runs)) == 1 and len(set(checks)) == 1
    record_criterion(10, "sweep and verify outputs are byte-identical", ok,
                     "serial x2 and 2 workers")
    assert ok


@pytest.mark.slow
def test_criterion_11_monte_carlo():
    rng = np.random.default_rng(1111)
    start = time.perf_counter()
    worst = 0.0
    for n in range(50):
        view, split, config = random_instance(rng)
        t = int(rng.integers(2, view.T + 1))
        model = JointGaussianModel(receiver_coefficients(t, view, split, config), config.noise(t))
        A, B = view.signal_layers(t), view.conditioned_layers(t)
        exact = conditional_mi(A, B, model)
        est = monte_carlo_mi(A, B, model, sample_count=10**6, seed=n)
        worst = max(worst, abs(est.value - exact) / est.stderr)
    elapsed = time.perf_counter() - start
    ok = worst < 3 and elapsed < 120
    record_criterion(11, "Monte Carlo agrees with the exact oracle", ok,
                     f"50 instances, worst deviation {worst:.2f} SE, {elapsed:.1f}s")
    assert ok
