"""Exception types shared across the package."""

from __future__ import annotations


class ConfigurationError(ValueError):
    """Invalid network geometry or scenario contents."""


class UsageError(ValueError):
    """A function was called with arguments outside its contract."""


class ValidationError(ValueError):
    """A power split violates the view constraints.

    The individual violations are kept on ``violations`` so callers can
    report all of them at once.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        lines = "; ".join(str(v) for v in self.violations)
        super().__init__(f"invalid power split: {lines}")


class BudgetExceededError(RuntimeError):
    def __init__(self, required: int, budget: int):
        self.required = required
        self.budget = budget
        super().__init__(
            f"grid search needs {required} evaluations, budget is {budget}"
        )


class UnsupportedError(ValueError):
    """Request is well formed but beyond what the implementation handles."""


class NumericalError(ArithmeticError):
    """Covariance conditioning or sampling hit a (near) singular pivot."""
