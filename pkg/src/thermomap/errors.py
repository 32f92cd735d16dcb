"""Exception types shared across the toolkit."""


class ThermomapError(Exception):
    """Base class for all toolkit-specific failures."""


class DomainError(ThermomapError, ValueError):
    """A point or interval falls outside the map domain or straddles a breakpoint."""


class BudgetError(ThermomapError, RuntimeError):
    """A preimage-tree expansion would exceed the node budget.

    Carries the deepest level that fits inside the budget so callers can retry.
    """

    def __init__(self, feasible_depth: int, requested_depth: int, budget: int):
        self.feasible_depth = feasible_depth
        self.requested_depth = requested_depth
        self.budget = budget
        super().__init__(
            f"node budget {budget} exceeded before depth {requested_depth}; "
            f"feasible max depth is {feasible_depth}"
        )


class ConvergenceError(ThermomapError, RuntimeError):
    """An iterative construction failed its own convergence gate."""


class AuditError(ThermomapError, RuntimeError):
    """A hard consistency audit failed (signals an implementation or input defect)."""


class ConfigError(ThermomapError, ValueError):
    """An experiment configuration file is malformed; message is line-anchored."""
