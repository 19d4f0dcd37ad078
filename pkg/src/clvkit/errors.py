"""Exception hierarchy with stable one-word codes for CLI error reporting."""

from __future__ import annotations


class ClvKitError(Exception):
    """Base class; ``code`` is the machine-parsable tag printed by the CLI."""

    code = "error"


class ArgumentError(ClvKitError, ValueError):
    code = "argument"


class NumericError(ClvKitError, ArithmeticError):
    code = "numeric"


class DegenerateFrameError(ClvKitError):
    """Tangent volume collapsed: a QR diagonal entry fell below the floor."""

    code = "rank-degenerate"


class SingularSolveError(ClvKitError):
    code = "singular-solve"


class DegenerateCoefficientError(ClvKitError):
    code = "degenerate-coefficient"


class NotConvergedError(ClvKitError):
    """Orbit not close enough to the equilibrium at the requested marker."""

    code = "not-converged"


class NotFoundError(ClvKitError, LookupError):
    code = "not-found"


class RadiusNotReachedError(ClvKitError):
    code = "radius-not-reached"


class ConfigError(ClvKitError):
    code = "config"


class CheckpointError(ClvKitError):
    code = "checkpoint"
