"""Exception types raised by the planner."""

from typing import Optional


class PlannerError(Exception):
    """Base class for planner errors."""


class InstanceValidationError(PlannerError):
    """Instance file violates the schema or an instance invariant."""


class ConfigError(PlannerError):
    """Solver or generation configuration is invalid."""


class DomainError(PlannerError, ValueError):
    """Numeric input outside the domain of a model formula."""


class DeploymentSizeError(PlannerError, ValueError):
    """Deployment vectors do not match the instance dimensions."""


class InfeasibleStartError(PlannerError):
    """A search was started from a deployment that violates its constraints."""


class RetainedConstraintError(PlannerError):
    """Deployment breaks a constraint kept in the Lagrangian relaxation."""

    def __init__(self, message: str, constraints: Optional[list] = None):
        super().__init__(message)
        self.constraints = constraints or []


class OracleSizeError(PlannerError):
    """Exhaustive enumeration would exceed the configured size guard."""

    def __init__(self, required: int, guard: int):
        super().__init__(
            f"Enumeration needs {required} (y, z) combinations but the size guard is {guard}; "
            f"raise the guard to at least {required}"
        )
        self.required = required
        self.guard = guard


class ReportError(PlannerError):
    """A report directory is missing or malformed."""
