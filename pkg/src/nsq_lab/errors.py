from __future__ import annotations


class LabError(Exception):
    """Base class; `exit_code` is what the CLI returns for it."""

    exit_code: int = 1


class ConstraintViolation(LabError, ValueError):
    """A parameter inequality does not hold. The message names the inequality."""

    exit_code = 2

    def __init__(self, constraint: str, detail: str | None = None) -> None:
        self.constraint = constraint
        msg = f"constraint violated: {constraint}"
        if detail:
            msg = f"{msg} ({detail})"
        super().__init__(msg)


class RegimeError(ConstraintViolation):
    """Sampled derivative magnitudes do not satisfy |f^(k)| ≍ λ."""


class DegenerateParameter(ConstraintViolation):
    """A derived parameter collapsed (for example Q = 0 at desk scale)."""


class BudgetExceeded(LabError, RuntimeError):
    exit_code = 3


class VerificationFailure(LabError, RuntimeError):
    """Two independent computations of the same quantity disagree."""

    exit_code = 4
