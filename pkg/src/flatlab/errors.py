"""Exception types shared across flatlab."""


class FlatlabError(Exception):
    """Base class for all flatlab errors."""


class EvalAtPole(FlatlabError, ZeroDivisionError):
    """A Laurent polynomial with negative exponents was evaluated at 0."""


class CacheCorrupt(FlatlabError):
    """A derivative cache record failed its checksum or could not be parsed."""


class UnresolvedOrder(FlatlabError):
    """Two root brackets could not be separated at the maximum refinement."""


class NotEnoughZeros(FlatlabError):
    """A census run never reached the requested number of zeros."""


class ToleranceUnreachable(FlatlabError):
    """Quadrature exhausted its node budget before meeting the tolerance."""


class HypothesisViolated(FlatlabError):
    """An exact precondition of a checker does not hold."""


class SpecParseError(FlatlabError, ValueError):
    """A function spec string is malformed or describes a non-flat function."""
