"""Power splits over superposition layers and the k-hop view window.

Layer ``U_j`` carries the freshest message decoded by node ``j``. Node ``i``
may put power on layers ``i..min(i+k-1, T-1)`` only. ``a[i][j]`` is the
fraction of node ``i``'s power placed on layer ``j``; every row sums to 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import UsageError, ValidationError

ROW_SUM_TOL = 1e-12


@lru_cache(maxsize=None)
def _layer_sets(T: int, k: int) -> dict[int, tuple[tuple[int, ...], ...]]:
    L = T - 1
    sets = {}
    for t in range(2, T + 1):
        sig = tuple(range(max(1, t - k), t))
        cond = tuple(range(t, min(t + k - 1, L) + 1))
        interf = tuple(j for j in range(1, L + 1) if j not in sig and j not in cond)
        for j in sig + interf:
            # node t's own layers must all sit in the conditioned set
            if max(1, j - k + 1) <= t <= j:
                raise RuntimeError(f"receiver {t} is a sender of unconditioned layer {j}")
        sets[t] = (sig, cond, interf)
    return sets


@dataclass(frozen=True)
class ViewSpec:
    """How far ahead each node cooperates: ``k = 1`` one-hop, ``k = T-1`` omniscient."""

    T: int
    k: int

    def __post_init__(self):
        if self.T < 2:
            raise UsageError("need at least 2 nodes")
        if not 1 <= self.k <= self.T - 1:
            raise UsageError(f"hop count k={self.k} outside 1..{self.T - 1}")

    @classmethod
    def omniscient(cls, T: int) -> "ViewSpec":
        return cls(T, T - 1)

    @property
    def n_layers(self) -> int:
        return self.T - 1

    @property
    def is_omniscient(self) -> bool:
        return self.k == self.T - 1

    def window(self, i: int) -> range:
        """Layers node ``i`` may transmit on."""
        return range(i, min(i + self.k - 1, self.T - 1) + 1)

    def senders(self, j: int) -> range:
        """Transmitters that may carry layer ``j``."""
        return range(max(1, j - self.k + 1), j + 1)

    def signal_layers(self, t: int) -> tuple[int, ...]:
        return _layer_sets(self.T, self.k)[t][0]

    def conditioned_layers(self, t: int) -> tuple[int, ...]:
        return _layer_sets(self.T, self.k)[t][1]

    def interference_layers(self, t: int) -> tuple[int, ...]:
        return _layer_sets(self.T, self.k)[t][2]


@dataclass(frozen=True)
class Violation:
    kind: str  # "negative", "window", "row_sum", "shape"
    node: int
    layer: int | None
    detail: str

    def __str__(self) -> str:
        where = f"node {self.node}" + (f", layer {self.layer}" if self.layer else "")
        return f"{self.kind} ({where}): {self.detail}"


class PowerSplit:
    """Dense, read-only layer matrix; ``split[i, j]`` is 1-based."""

    def __init__(self, matrix):
        m = np.array(matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
            raise UsageError(f"power split must be a square matrix, got shape {m.shape}")
        m.setflags(write=False)
        self._m = m

    @property
    def matrix(self) -> np.ndarray:
        return self._m

    @property
    def n_layers(self) -> int:
        return self._m.shape[0]

    def __getitem__(self, key: tuple[int, int]) -> float:
        i, j = key
        return float(self._m[i - 1, j - 1])

    def row(self, i: int) -> np.ndarray:
        return self._m[i - 1]

    def flat(self) -> tuple[float, ...]:
        return tuple(self._m.ravel().tolist())

    def to_list(self) -> list[list[float]]:
        return self._m.tolist()

    def __eq__(self, other) -> bool:
        return isinstance(other, PowerSplit) and np.array_equal(self._m, other._m)

    def __hash__(self) -> int:
        return hash(self.flat())

    def __repr__(self) -> str:
        return f"PowerSplit({self.to_list()})"


def from_rows(view: ViewSpec, rows: Sequence[Sequence[float]]) -> PowerSplit:
    """Build a split from per-node window fractions (first entry = own layer)."""
    L = view.n_layers
    if len(rows) != L:
        raise UsageError(f"expected {L} rows, got {len(rows)}")
    m = np.zeros((L, L))
    for i, row in enumerate(rows, start=1):
        w = view.window(i)
        if len(row) != len(w):
            raise UsageError(f"node {i} window has {len(w)} slots, got {len(row)} values")
        m[i - 1, w.start - 1 : w.stop - 1] = row
    return PowerSplit(m)


def uniform_split(view: ViewSpec) -> PowerSplit:
    return from_rows(view, [[1.0 / len(view.window(i))] * len(view.window(i))
                            for i in range(1, view.T)])


def next_hop_split(view: ViewSpec) -> PowerSplit:
    """All power on each node's own layer (plain multi-hop forwarding)."""
    return PowerSplit(np.eye(view.n_layers))


def validate(split: PowerSplit, view: ViewSpec) -> list[Violation]:
    """Every violated split invariant; an empty list means the split is valid."""
    L = view.n_layers
    if split.n_layers != L:
        return [Violation("shape", 0, None, f"split has {split.n_layers} layers, view needs {L}")]
    out = []
    for i in range(1, L + 1):
        w = view.window(i)
        for j in range(1, L + 1):
            a = split[i, j]
            if a < 0:
                out.append(Violation("negative", i, j, f"fraction {a!r} < 0"))
            if a != 0 and j not in w:
                out.append(Violation(
                    "window", i, j,
                    f"fraction {a!r} outside window {w.start}..{w.stop - 1} (k={view.k})",
                ))
        total = float(np.sum(split.row(i)))
        # open interval: a sum exactly 1e-12 away already counts as a violation
        if not 1.0 - ROW_SUM_TOL < total < 1.0 + ROW_SUM_TOL:
            out.append(Violation("row_sum", i, None, f"row sums to {total!r}, expected 1"))
    return out


def require_valid(split: PowerSplit, view: ViewSpec) -> None:
    problems = validate(split, view)
    if problems:
        raise ValidationError(problems)


def _fraction(name: str, value: float) -> float:
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise ValidationError([Violation("range", 0, None, f"{name}={value} outside [0, 1]")])
    return value


def from_named_omniscient(alpha1=0.0, beta1=0.0, gamma1=0.0, alpha2=0.0, beta2=0.0,
                          alpha3=0.0, T: int = 5) -> PowerSplit:
    """Five-node omniscient parameterization.

    alpha_i goes to the destination, beta_i two layers short of it, gamma_1
    to node 3; the remainder stays on the node's own layer.
    """
    if T != 5:
        raise UsageError("the named omniscient form is defined for T=5 only")
    alpha1, beta1, gamma1 = (_fraction(n, v) for n, v in
                             (("alpha1", alpha1), ("beta1", beta1), ("gamma1", gamma1)))
    alpha2, beta2 = _fraction("alpha2", alpha2), _fraction("beta2", beta2)
    alpha3 = _fraction("alpha3", alpha3)
    if alpha1 + beta1 + gamma1 > 1.0:
        raise ValidationError([Violation("range", 1, None,
                                         f"alpha1+beta1+gamma1={alpha1 + beta1 + gamma1} > 1")])
    if alpha2 + beta2 > 1.0:
        raise ValidationError([Violation("range", 2, None, f"alpha2+beta2={alpha2 + beta2} > 1")])
    # sums already checked <= 1; clamp rounding residue below zero
    return PowerSplit([
        [max(1.0 - alpha1 - beta1 - gamma1, 0.0), gamma1, beta1, alpha1],
        [0.0, max(1.0 - alpha2 - beta2, 0.0), beta2, alpha2],
        [0.0, 0.0, 1.0 - alpha3, alpha3],
        [0.0, 0.0, 0.0, 1.0],
    ])


def from_named_twohop(alpha1=0.0, alpha2=0.0, alpha3=0.0, T: int = 5) -> PowerSplit:
    """Five-node two-hop form: node t sends alpha_t of its power two hops ahead."""
    if T != 5:
        raise UsageError("the named two-hop form is defined for T=5 only")
    alphas = [_fraction(f"alpha{t}", v) for t, v in enumerate((alpha1, alpha2, alpha3), 1)]
    m = np.zeros((4, 4))
    for t, a in enumerate(alphas, start=1):
        m[t - 1, t - 1] = 1.0 - a
        m[t - 1, t] = a
    m[3, 3] = 1.0
    return PowerSplit(m)


def to_named_omniscient(split: PowerSplit) -> dict[str, float]:
    if split.n_layers != 4:
        raise UsageError("named omniscient form needs a 5-node split")
    return {
        "alpha1": split[1, 4], "beta1": split[1, 3], "gamma1": split[1, 2],
        "alpha2": split[2, 4], "beta2": split[2, 3],
        "alpha3": split[3, 4],
    }


def to_named_twohop(split: PowerSplit) -> dict[str, float]:
    if split.n_layers != 4:
        raise UsageError("named two-hop form needs a 5-node split")
    return {f"alpha{t}": split[t, t + 1] for t in (1, 2, 3)}
