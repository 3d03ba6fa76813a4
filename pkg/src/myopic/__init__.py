"""Decode-forward achievable rates for omniscient and k-hop myopic relaying."""

from .allocation import (PowerSplit, ViewSpec, from_named_omniscient, from_named_twohop,
                         next_hop_split, uniform_split, validate)
from .channel import GainMatrix, NetworkConfig, build_gain_matrix, gain
from .errors import (BudgetExceededError, ConfigurationError, NumericalError, UnsupportedError,
                     UsageError, ValidationError)
from .optimizer import OptimizationResult, OptimizerOptions, grid_search, optimize, refine
from .rates import RateReport, end_to_end_rate, omniscient_rate_with_permutation, reception_rate

__version__ = "0.1.0"
