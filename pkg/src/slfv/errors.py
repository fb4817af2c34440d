"""Exception types shared across the simulator."""
from __future__ import annotations


class SlfvError(Exception):
    """Base class for all simulator errors."""


class InvalidMeasureError(SlfvError):
    """The radius measure is empty, non-finite, or otherwise malformed."""


class NoValidDeltaError(SlfvError):
    """No step width gives positive mass to the slow-chain radius filter."""


class InvalidWindowError(SlfvError):
    """A window has non-positive area or is incompatible with the run setup."""


class AcceptanceError(SlfvError):
    """An event was inserted without satisfying the acceptance predicate."""


class BudgetExceededError(SlfvError):
    """The candidate budget ran out before the stop condition was reached.

    Carries the partial log and report so callers can salvage the run.
    """

    def __init__(self, message, log=None, report=None):
        super().__init__(message)
        self.log = log
        self.report = report


class ChainNotFoundError(SlfvError):
    """The requested trigger event is not present in the log."""


class FitUndefinedError(SlfvError):
    """A regression has no information to fit (e.g. all displacements zero)."""


class DegenerateIntersectionError(SlfvError):
    """Parent sampling failed: the event/occupied intersection is too thin."""


class ConfigError(SlfvError):
    """The run configuration failed schema validation."""
