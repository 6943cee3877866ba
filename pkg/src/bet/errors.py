"""Exception hierarchy.

Every error raised for bad input derives from :class:`BetError`; the CLI maps
these to exit status 2.
"""


class BetError(Exception):
    """Base class for all input and contract violations."""


class TiesPresent(BetError):
    pass


class RangeError(BetError):
    pass


class InputFormatError(BetError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class DepthMismatch(BetError):
    pass


class LengthNotPowerOfTwo(BetError):
    pass


class NonPositiveProbability(BetError):
    pass


class ParityViolation(BetError):
    pass


class OutOfRange(BetError):
    pass


class MarginMismatch(BetError):
    pass


class InfeasibleCell(BetError):
    pass


class DegenerateVariance(BetError):
    pass


class SampleTooSmall(BetError):
    pass


class EmptyMarginError(BetError):
    pass


class UnknownScenario(BetError):
    pass
