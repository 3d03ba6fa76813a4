"""Independent Gaussian mutual-information oracle.

For a single receiver the model is ``Y = sum_j c_j U_j + Z`` with unit
variance, mutually independent layers ``U_j`` and noise ``Z ~ N(0, N)``.
``conditional_mi`` assembles the joint covariance of ``(U_1..U_L, Y)`` and
conditions it with a symmetric LDL^T factorization carried out in exact
rational arithmetic, so the result does not depend on floating-point
cancellation even when the conditioned layers dwarf the noise floor.
``monte_carlo_mi`` is a sampling-based cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, NamedTuple

import numpy as np

from .errors import NumericalError, UsageError

PIVOT_FLOOR = 1e-12
_PIVOT_FLOOR = Fraction(PIVOT_FLOOR)


@dataclass(frozen=True)
class JointGaussianModel:
    """Layer amplitudes seen by one receiver (``coefficients[j-1]`` for U_j)."""

    coefficients: tuple[float, ...]
    noise: float

    def __post_init__(self):
        object.__setattr__(self, "coefficients", tuple(float(c) for c in self.coefficients))
        if not self.noise > 0:
            raise UsageError("noise variance must be positive")

    @property
    def n_layers(self) -> int:
        return len(self.coefficients)

    def covariance(self) -> list[list[Fraction]]:
        """Exact covariance of ``(U_1, ..., U_L, Y)``; Y is the last index."""
        L = self.n_layers
        c = [Fraction(x) for x in self.coefficients]
        cov = [[Fraction(int(r == s)) for s in range(L + 1)] for r in range(L + 1)]
        for j in range(L):
            cov[j][L] = cov[L][j] = c[j]
        cov[L][L] = sum((x * x for x in c), Fraction(0)) + Fraction(self.noise)
        return cov


def ldl_pivots(cov: list[list[Fraction]], labels=None) -> list[Fraction]:
    """Diagonal of D in ``cov = L D L^T``.

    Pivot ``r`` is the variance of variable ``r`` given variables ``0..r-1``.
    """
    n = len(cov)
    low = [[Fraction(0)] * n for _ in range(n)]
    d: list[Fraction] = []
    for r in range(n):
        pivot = cov[r][r] - sum((low[r][s] ** 2 * d[s] for s in range(r)), Fraction(0))
        if pivot <= _PIVOT_FLOOR:
            name = labels[r] if labels else r
            raise NumericalError(
                f"covariance not positive definite: pivot for {name} is {float(pivot):.3e}"
                f" (floor {PIVOT_FLOOR:g}); diagonal={[float(cov[q][q]) for q in range(n)]}"
            )
        d.append(pivot)
        for q in range(r + 1, n):
            acc = cov[q][r] - sum((low[q][s] * low[r][s] * d[s] for s in range(r)), Fraction(0))
            low[q][r] = acc / pivot
    return d


def conditional_variance(model: JointGaussianModel, given: Iterable[int]) -> Fraction:
    """Var(Y | U_given) from the joint covariance, exactly."""
    given = sorted(set(given))
    cov = model.covariance()
    keep = [j - 1 for j in given] + [model.n_layers]
    sub = [[cov[r][s] for s in keep] for r in keep]
    labels = [f"U_{j}" for j in given] + ["Y"]
    return ldl_pivots(sub, labels)[-1]


def _check_sets(A, B, L):
    A, B = set(A), set(B)
    if A & B:
        raise UsageError(f"layer sets overlap: {sorted(A & B)}")
    bad = sorted(j for j in A | B if not 1 <= j <= L)
    if bad:
        raise UsageError(f"layer indices {bad} outside 1..{L}")
    return A, B


def conditional_mi(A: Iterable[int], B: Iterable[int], model: JointGaussianModel) -> float:
    """I(U_A; Y | U_B) in bits."""
    A, B = _check_sets(A, B, model.n_layers)
    v_b = conditional_variance(model, B)
    v_ab = conditional_variance(model, A | B)
    return math.log1p(float((v_b - v_ab) / v_ab)) / (2.0 * math.log(2.0))


class MonteCarloEstimate(NamedTuple):
    value: float
    stderr: float
    samples: int


def _residual_variance(y, design):
    if design.shape[1] == 0:
        return y, float(y @ y) / y.size
    coef, _, rank, _ = np.linalg.lstsq(design, y, rcond=None)
    if rank < design.shape[1]:
        raise NumericalError(f"sample design matrix is rank deficient ({rank} < {design.shape[1]})")
    resid = y - design @ coef
    var = float(resid @ resid) / (y.size - design.shape[1])
    if not var > 0:
        raise NumericalError("residual variance is not positive")
    return resid, var


def monte_carlo_mi(A: Iterable[int], B: Iterable[int], model: JointGaussianModel,
                   sample_count: int = 10**6, seed: int = 0) -> MonteCarloEstimate:
    """Sampling estimate of I(U_A; Y | U_B) with a delta-method standard error.

    Both conditional variances are residual variances of least-squares fits
    of Y on the conditioning layers.
    """
    A, B = _check_sets(A, B, model.n_layers)
    if sample_count < 10**4:
        raise UsageError("monte_carlo_mi needs at least 10^4 samples")
    rng = np.random.default_rng(seed)
    L = model.n_layers
    U = rng.standard_normal((sample_count, L))
    Z = rng.standard_normal(sample_count) * math.sqrt(model.noise)
    Y = U @ np.asarray(model.coefficients) + Z

    cols_b = [j - 1 for j in sorted(B)]
    cols_ab = [j - 1 for j in sorted(A | B)]
    r_b, v_b = _residual_variance(Y, U[:, cols_b])
    r_ab, v_ab = _residual_variance(Y, U[:, cols_ab])

    value = 0.5 * math.log2(v_b / v_ab)
    influence = r_b**2 / v_b - r_ab**2 / v_ab
    stderr = float(np.std(influence)) / math.sqrt(sample_count) / (2.0 * math.log(2.0))
    return MonteCarloEstimate(value, stderr, sample_count)
