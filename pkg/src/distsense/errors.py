"""Exception hierarchy shared by all modules."""


class SensingError(ValueError):
    """Base class for domain errors (CLI exit code 2)."""


class PositionOnSource(SensingError):
    pass


class DimensionMismatch(SensingError):
    pass


class SignalIndistinguishable(SensingError):
    """The signal row lies (numerically) in the span of the noise rows."""


class Degenerate(SensingError):
    pass


class TooLarge(SensingError):
    pass


class Infeasible(SensingError):
    pass


class NotNormalized(SensingError):
    pass


class NotTwoBranch(SensingError):
    pass


class NonIntegerEigenvalue(SensingError):
    """A branch vector cannot be realized by a pattern of +-1 qubits."""


class OddJ(SensingError):
    pass


class ParseError(Exception):
    """Malformed scenario file (CLI exit code 1)."""
