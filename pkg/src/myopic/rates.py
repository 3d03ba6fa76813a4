"""Decode-forward reception rates under k-hop myopic coding.

Receiver ``t`` decodes the layers one to k hops behind it (signal), knows
the layers it and the next k-1 nodes forward (conditioned, removed), and
sees every other layer as Gaussian interference. Amplitudes of one layer
sent by several nodes add coherently::

    c[j][t] = sum_{i in senders(j), i != t} sqrt(g[i][t] * a[i][j] * P_i)
    R_t     = 1/2 * log2(1 + S_t / (N_t + I_t))

``k = T-1`` is omniscient coding (no interference) and ``k = 1`` is plain
one-hop forwarding.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .allocation import PowerSplit, ViewSpec, require_valid
from .channel import NetworkConfig, build_gain_matrix
from .errors import UnsupportedError

LN2 = math.log(2.0)
MAX_PERMUTED_RELAYS = 7


def rate_from_sinr(sinr: float) -> float:
    """Gaussian rate in bits per channel use; log1p keeps tiny SINRs exact."""
    return math.log1p(sinr) / (2.0 * LN2)


# The two helpers below are the single arithmetic path for rates. They run
# on python floats for one split and on broadcast numpy arrays for a whole
# grid; the operation order is identical so both give bit-identical values.

def _amplitudes(view: ViewSpec, fraction, gains, powers, sqrt):
    """Per-transmitter amplitudes keyed ``(i, j, t)``.

    ``fraction(i, j)`` returns node i's share on layer j (float or array).
    """
    amps = {}
    for i in range(1, view.T):
        for j in view.window(i):
            f = fraction(i, j)
            for t in range(2, view.T + 1):
                if t != i:
                    amps[i, j, t] = sqrt(gains[i - 1][t - 1] * f * powers[i - 1])
    return amps


def _layer_amplitude(amps, view: ViewSpec, j: int, t: int):
    c = 0.0
    for i in view.senders(j):
        if i != t:
            c = c + amps[i, j, t]
    return c


def _signal_interference(amps, view: ViewSpec, t: int):
    S = 0.0
    for j in view.signal_layers(t):
        c = _layer_amplitude(amps, view, j, t)
        S = S + c * c
    I = 0.0
    for j in view.interference_layers(t):
        c = _layer_amplitude(amps, view, j, t)
        I = I + c * c
    return S, I


def _gain_rows(config: NetworkConfig) -> list[list[float]]:
    return build_gain_matrix(config).values.tolist()


def _split_amplitudes(view: ViewSpec, split: PowerSplit, config: NetworkConfig):
    m = split.matrix.tolist()
    return _amplitudes(view, lambda i, j: m[i - 1][j - 1], _gain_rows(config),
                       list(config.powers), math.sqrt)


def _check_dims(view: ViewSpec, config: NetworkConfig) -> None:
    if view.T != config.n_nodes:
        raise UnsupportedError(f"view is for T={view.T} but config has {config.n_nodes} nodes")


def receiver_coefficients(t: int, view: ViewSpec, split: PowerSplit,
                          config: NetworkConfig) -> np.ndarray:
    """Amplitude of every layer ``U_1..U_{T-1}`` in ``Y_t`` (index j-1)."""
    _check_dims(view, config)
    require_valid(split, view)
    amps = _split_amplitudes(view, split, config)
    return np.array([_layer_amplitude(amps, view, j, t) for j in range(1, view.T)])


@dataclass(frozen=True)
class NodeRate:
    t: int
    rate: float
    signal: float
    interference: float
    noise: float
    signal_layers: tuple[int, ...]
    conditioned_layers: tuple[int, ...]
    interference_layers: tuple[int, ...]

    @property
    def sinr(self) -> float:
        return self.signal / (self.noise + self.interference)


@dataclass(frozen=True)
class RateReport:
    view: ViewSpec
    split: PowerSplit
    per_node: tuple[NodeRate, ...]
    end_to_end: float
    bottleneck: int

    def node(self, t: int) -> NodeRate:
        return self.per_node[t - 2]

    @property
    def rates(self) -> dict[int, float]:
        return {n.t: n.rate for n in self.per_node}


def _node_rate(amps, view: ViewSpec, config: NetworkConfig, t: int) -> NodeRate:
    S, I = _signal_interference(amps, view, t)
    N = config.noise(t)
    return NodeRate(
        t=t, rate=rate_from_sinr(S / (N + I)), signal=S, interference=I, noise=N,
        signal_layers=view.signal_layers(t),
        conditioned_layers=view.conditioned_layers(t),
        interference_layers=view.interference_layers(t),
    )


def reception_rate(t: int, view: ViewSpec, split: PowerSplit, config: NetworkConfig) -> float:
    """Rate (bits/use) at which node ``t`` can decode the source stream."""
    _check_dims(view, config)
    if not 2 <= t <= view.T:
        raise UnsupportedError(f"receiver {t} outside 2..{view.T}")
    require_valid(split, view)
    return _node_rate(_split_amplitudes(view, split, config), view, config, t).rate


def end_to_end_rate(view: ViewSpec, split: PowerSplit, config: NetworkConfig) -> RateReport:
    _check_dims(view, config)
    require_valid(split, view)
    amps = _split_amplitudes(view, split, config)
    per_node = tuple(_node_rate(amps, view, config, t) for t in range(2, view.T + 1))
    worst = min(per_node, key=lambda n: (n.rate, n.t))
    return RateReport(view, split, per_node, worst.rate, worst.t)


def min_sinr(view: ViewSpec, split: PowerSplit, config: NetworkConfig) -> float:
    """Smallest per-node SINR; unvalidated fast path for the optimizer."""
    amps = _split_amplitudes(view, split, config)
    return min(S / (config.noise(t) + I) for t in range(2, view.T + 1)
               for S, I in [_signal_interference(amps, view, t)])


def min_sinr_grid(view: ViewSpec, config: NetworkConfig,
                  candidates: Sequence[np.ndarray]) -> np.ndarray:
    """Minimum SINR over receivers for every combination of per-node rows.

    ``candidates[i-1]`` has shape ``(n_i, len(window(i)))``; the result has
    shape ``(n_1, ..., n_{T-1})`` with node 1 on the leading axis.
    """
    L = view.n_layers
    shaped = []
    for i, rows in enumerate(candidates, start=1):
        shape = [1] * L
        shape[i - 1] = rows.shape[0]
        shaped.append((rows, shape))

    def fraction(i, j):
        rows, shape = shaped[i - 1]
        return rows[:, j - i].reshape(shape)

    amps = _amplitudes(view, fraction, _gain_rows(config), list(config.powers), np.sqrt)
    full = tuple(rows.shape[0] for rows, _ in shaped)
    worst = None
    for t in range(2, view.T + 1):
        S, I = _signal_interference(amps, view, t)
        sinr = np.broadcast_to(S / (config.noise(t) + I), full)
        worst = sinr.copy() if worst is None else np.minimum(worst, sinr)
    return worst


def relay_orders(T: int):
    """Full logical orders (1, ..., T), identity first."""
    for perm in itertools.permutations(range(2, T)):
        yield (1, *perm, T)


def omniscient_rate_with_permutation(
    split_provider: Callable[[NetworkConfig], PowerSplit],
    config: NetworkConfig,
) -> tuple[tuple[int, ...], RateReport]:
    """Best relay order for omniscient coding.

    ``split_provider`` picks a split for a relabeled config (logical order).
    The identity order is tried first and is kept unless another order is
    strictly better.
    """
    T = config.n_nodes
    if T - 2 > MAX_PERMUTED_RELAYS:
        raise UnsupportedError(
            f"{T - 2} relays: exhaustive order search is limited to {MAX_PERMUTED_RELAYS}"
        )
    view = ViewSpec.omniscient(T)
    best = None
    for order in relay_orders(T):
        relabeled = config.relabeled(order)
        report = end_to_end_rate(view, split_provider(relabeled), relabeled)
        if best is None or report.end_to_end > best[1].end_to_end:
            best = (order, report)
    return best
