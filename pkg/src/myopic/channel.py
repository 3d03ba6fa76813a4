"""One-dimensional Gaussian multiple-relay channel geometry.

Nodes are numbered 1..T. Node 1 is the source, node T the destination and
nodes 2..T-1 relay. Nodes 1..T-1 transmit, nodes 2..T receive. The power gain
between a transmitter and a receiver follows ``kappa * d ** -eta``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigurationError, UsageError


@dataclass(frozen=True)
class NetworkConfig:
    """Positions (m), transmit powers (W), receiver noises (W), path loss.

    ``powers[i - 1]`` belongs to transmitter ``i`` (1..T-1) and
    ``noises[t - 2]`` to receiver ``t`` (2..T).
    """

    positions: tuple[float, ...]
    powers: tuple[float, ...]
    noises: tuple[float, ...]
    kappa: float = 1.0
    eta: float = 2.0

    def __post_init__(self):
        object.__setattr__(self, "positions", tuple(float(x) for x in self.positions))
        object.__setattr__(self, "powers", tuple(float(x) for x in self.powers))
        object.__setattr__(self, "noises", tuple(float(x) for x in self.noises))
        object.__setattr__(self, "kappa", float(self.kappa))
        object.__setattr__(self, "eta", float(self.eta))

        T = len(self.positions)
        if T < 2:
            raise ConfigurationError("need at least 2 nodes (source and destination)")
        if len(self.powers) != T - 1:
            raise ConfigurationError(f"expected {T - 1} powers, got {len(self.powers)}")
        if len(self.noises) != T - 1:
            raise ConfigurationError(f"expected {T - 1} noises, got {len(self.noises)}")
        values = self.positions + self.powers + self.noises + (self.kappa, self.eta)
        if not all(math.isfinite(v) for v in values):
            raise ConfigurationError("all configuration values must be finite")
        if len(set(self.positions)) != T:
            raise ConfigurationError(f"node positions must be distinct: {self.positions}")
        # zero power is allowed: it models a silent node and gives zero rates
        if any(p < 0 for p in self.powers):
            raise ConfigurationError("transmit powers must be non-negative")
        if any(n <= 0 for n in self.noises):
            raise ConfigurationError("noise variances must be positive")
        if self.kappa <= 0:
            raise ConfigurationError("kappa must be positive")
        if self.eta <= 0:
            raise ConfigurationError("eta must be positive")
        if self.eta < 2:
            warnings.warn(
                f"path-loss exponent eta={self.eta} is below the free-space value 2",
                stacklevel=3,
            )

    @property
    def n_nodes(self) -> int:
        return len(self.positions)

    def power(self, i: int) -> float:
        return self.powers[i - 1]

    def noise(self, t: int) -> float:
        return self.noises[t - 2]

    def distance(self, i: int, t: int) -> float:
        return abs(self.positions[i - 1] - self.positions[t - 1])

    def relabeled(self, order: Sequence[int]) -> "NetworkConfig":
        """Config whose logical node ``n`` is the physical node ``order[n - 1]``.

        ``order`` must start with 1 and end with T; only relays move. Each
        node keeps its own position, power and noise.
        """
        T = self.n_nodes
        order = tuple(order)
        if sorted(order) != list(range(1, T + 1)) or order[0] != 1 or order[-1] != T:
            raise UsageError(f"{order} is not a relay permutation of 1..{T}")
        return NetworkConfig(
            positions=[self.positions[n - 1] for n in order],
            powers=[self.powers[n - 1] for n in order[:-1]],
            noises=[self.noises[n - 2] for n in order[1:]],
            kappa=self.kappa,
            eta=self.eta,
        )

    def with_powers(self, value: float) -> "NetworkConfig":
        return NetworkConfig(
            self.positions, [value] * len(self.powers), self.noises, self.kappa, self.eta
        )

    def with_noises(self, value: float) -> "NetworkConfig":
        return NetworkConfig(
            self.positions, self.powers, [value] * len(self.noises), self.kappa, self.eta
        )


def _check_pair(i: int, t: int, T: int) -> None:
    if i == t:
        raise UsageError(f"gain from node {i} to itself is undefined")
    if not 1 <= i <= T - 1:
        raise UsageError(f"transmitter index {i} outside 1..{T - 1}")
    if not 2 <= t <= T:
        raise UsageError(f"receiver index {t} outside 2..{T}")


def path_gain(distance: float, kappa: float, eta: float) -> float:
    if distance <= 0:
        raise ConfigurationError("coincident nodes: path gain undefined at distance 0")
    return kappa * distance ** (-eta)


def gain(i: int, t: int, config: NetworkConfig) -> float:
    """Power gain from transmitter ``i`` to receiver ``t``."""
    _check_pair(i, t, config.n_nodes)
    return path_gain(config.distance(i, t), config.kappa, config.eta)


class GainMatrix:
    """Pairwise power gains, indexed 1-based as ``g[i, t]``.

    Entries that are never read (diagonal, node T as transmitter, node 1 as
    receiver) hold NaN in ``values``.
    """

    def __init__(self, values: np.ndarray):
        self.values = values
        self.values.setflags(write=False)

    @property
    def n_nodes(self) -> int:
        return self.values.shape[0]

    def __getitem__(self, key: tuple[int, int]) -> float:
        i, t = key
        _check_pair(i, t, self.n_nodes)
        return float(self.values[i - 1, t - 1])

    def __repr__(self) -> str:
        return f"GainMatrix(T={self.n_nodes})"


def build_gain_matrix(config: NetworkConfig) -> GainMatrix:
    T = config.n_nodes
    values = np.full((T, T), np.nan)
    for i in range(1, T):
        for t in range(2, T + 1):
            if i != t:
                values[i - 1, t - 1] = gain(i, t, config)
    return GainMatrix(values)
