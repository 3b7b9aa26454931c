"""Exception hierarchy.

Validation problems (bad inputs, wrong regime) derive from ``ValueError``;
numerical failures derive from :class:`ConvergenceError`.  The command line
maps the first family to exit code 2 and the second to exit code 3.
"""


class RuinError(Exception):
    """Base class for every error raised by this package."""


class InvalidParams(RuinError, ValueError):
    pass


class OutOfRegime(RuinError, ValueError):
    pass


class DomainError(RuinError, ValueError):
    pass


class SchemeMismatch(RuinError, ValueError):
    pass


class ConvergenceError(RuinError):
    pass


class NoBracket(ConvergenceError):
    pass


class NoRoot(ConvergenceError):
    pass


class SingularDerivative(ConvergenceError):
    pass


class Unbounded(ConvergenceError):
    pass
