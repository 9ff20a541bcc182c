"""Exception types shared across the toolkit."""

from __future__ import annotations


class RedesignLabError(Exception):
    """Base class for every error raised by this package."""


class UnknownTransition(RedesignLabError):
    """A transition id does not exist in the net."""


class NotEnabled(RedesignLabError):
    """The transition has no complete set of tokens for the given case."""


class UnknownLabel(RedesignLabError):
    """No transition carries the requested label."""


class AmbiguousLabel(RedesignLabError):
    """More than one transition carries the requested label."""


class NegativeDuration(RedesignLabError):
    """A service duration must be >= 0."""


class UnsupportedDistribution(RedesignLabError):
    """The transformation is only defined for deterministic service times."""


class InvalidModel(RedesignLabError):
    """A simulation model failed validation.

    Carries the offending ValidationReport in ``report`` when available.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class NotAStateMachine(RedesignLabError):
    """The analytic transformation requires |preset| = |postset| = 1 everywhere."""


class MissingTiming(RedesignLabError):
    """A labelled transition has no service parameters."""


class SingularSystem(RedesignLabError):
    """A linear system has no unique solution.

    Raised when silent transitions form a cycle that traps probability mass,
    or when the routing matrix does not describe an open network.
    """


class Unstable(RedesignLabError):
    """A service center has utilisation >= 1, so no steady state exists."""

    def __init__(self, message, center=None):
        super().__init__(message)
        self.center = center


class ParseError(RedesignLabError):
    """A model file could not be parsed. Carries the 1-based line number."""

    def __init__(self, line, message):
        super().__init__(f"line {line}: {message}")
        self.line = line
        self.message = message


class ValidationFailed(RedesignLabError):
    """A parsed model violates structural invariants.

    Carries the ValidationReport in ``report``.
    """

    def __init__(self, report):
        lines = "; ".join(v.message for v in report.violations)
        super().__init__(f"model validation failed: {lines}")
        self.report = report


class UnknownCase(RedesignLabError):
    """A schedule entry references a case with no recorded arrival."""
