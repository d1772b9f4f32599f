"""Error taxonomy shared across the simulation engine.

Estimator failures (subclasses of :class:`EstimatorFailure`) are recorded
per replication rather than aborting a run; everything else is raised.
"""
from __future__ import annotations


class MrselError(Exception):
    """Base class for all package errors."""


class InvalidConfig(MrselError):
    """A scenario configuration violates a structural constraint."""

    def __init__(self, constraint: str):
        super().__init__(constraint)
        self.constraint = constraint


class SchemaViolation(MrselError):
    """A configuration document does not conform to the published schema."""

    def __init__(self, path: str, reason: str):
        super().__init__(f"{path}: {reason}")
        self.path = path
        self.reason = reason


class InsufficientSelected(MrselError):
    """Fewer individuals were selected than the requested sample size.

    Signals an infeasible (gamma_0, n, N) combination. This is a hard
    error by design: silently regenerating cohorts would change the
    effective data-generating process.
    """

    def __init__(self, available: int, required: int):
        super().__init__(
            f"only {available} individuals selected, {required} required"
        )
        self.available = available
        self.required = required


class UnknownScenario(MrselError):
    """Catalog lookup failed; carries the listing of valid ids."""

    def __init__(self, requested: str, valid_ids: tuple[str, ...]):
        super().__init__(
            f"unknown scenario {requested!r}; valid ids: {', '.join(valid_ids)}"
        )
        self.requested = requested
        self.valid_ids = valid_ids


class NoEffectiveReps(MrselError):
    """Every replication errored for the requested estimator."""


class EstimatorFailure(MrselError):
    """Base class for per-replication estimator failures (recorded, not raised)."""

    @property
    def code(self) -> str:
        return type(self).__name__


class DegenerateDesign(EstimatorFailure):
    """Regression design has no usable variation (or is singular)."""


class ZeroDenominator(EstimatorFailure):
    """Ratio estimate requested with a zero denominator coefficient."""


class NonConvergence(EstimatorFailure):
    """Iteratively reweighted least squares failed to converge."""

    def __init__(self, iterations: int):
        super().__init__(f"no convergence after {iterations} iterations")
        self.iterations = iterations


class SeparationDetected(EstimatorFailure):
    """Quasi-complete separation in logistic regression (runaway coefficient)."""


class ExtremeWeights(UserWarning):
    """Inverse probability weights span more than four orders of magnitude."""
