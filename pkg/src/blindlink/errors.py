"""Exception types raised across the package."""


class BlindLinkError(Exception):
    """Base class for every error raised by blindlink."""


# finite fields
class FieldMismatch(BlindLinkError, ValueError):
    pass


class DivisionByZero(BlindLinkError, ZeroDivisionError):
    pass


class InvalidEvaluationPoints(BlindLinkError, ValueError):
    pass


class SingularMatrix(BlindLinkError, ValueError):
    pass


class ShapeError(BlindLinkError, ValueError):
    pass


# coding
class ArityError(BlindLinkError, ValueError):
    pass


class InsufficientObservations(BlindLinkError):
    """Raised when a decoder is handed a codeword with erased symbols."""

    def __init__(self, missing, message=None):
        self.missing = missing
        super().__init__(message or f"{missing} symbol(s) erased; all must be present to decode")


class TooLarge(BlindLinkError, ValueError):
    pass


class EncodingError(BlindLinkError, ValueError):
    pass


# antennas
class BelowCutoff(BlindLinkError, ValueError):
    pass


class BadGeometry(BlindLinkError, ValueError):
    pass


# blind region / link
class PolicyInfeasible(BlindLinkError):
    def __init__(self, channels, message=None):
        self.channels = list(channels)
        super().__init__(message or f"cannot equalize power at Bob; channels in a null: {self.channels}")


class OutOfRange(BlindLinkError, ValueError):
    pass


class BobBlind(BlindLinkError):
    def __init__(self, channels):
        self.channels = list(channels)
        super().__init__(f"Bob is below the detection threshold on channels {self.channels}")


class ConfigError(BlindLinkError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


class InconsistentSystem(BlindLinkError, ValueError):
    pass
