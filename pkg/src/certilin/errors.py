"""Exception hierarchy shared by every certilin module."""


class CertilinError(Exception):
    """Base class for all library errors."""


class ZeroInverse(CertilinError, ZeroDivisionError):
    pass


class ModuliNotCoprime(CertilinError, ValueError):
    pass


class ZeroMatrixError(CertilinError, ValueError):
    """The matrix is zero: its rank is 0 and no primes are needed."""


class DimensionMismatch(CertilinError, ValueError):
    pass


class InconsistentSystem(CertilinError, ArithmeticError):
    pass


class MatrixNonsingular(CertilinError, ArithmeticError):
    pass


class RankTooSmall(CertilinError, ArithmeticError):
    pass


class NotSymmetric(CertilinError, ValueError):
    pass


class StateNotCoprime(CertilinError, ValueError):
    pass


class ProtocolError(CertilinError):
    """Base for failures raised while running or replaying a protocol."""


class ProtocolAbort(ProtocolError):
    """The prover cannot answer the challenge (honest refusal or failed cheat)."""


class SchemaViolation(ProtocolError):
    pass


class ChallengeMismatch(ProtocolError):
    pass


class SubsetTooSmall(ProtocolError):
    pass


class RedrawBudgetExceeded(ProtocolError):
    pass


class TranscriptNotAccepted(ProtocolError):
    pass


class ParseError(CertilinError, ValueError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f" (line {line}" + (f", column {column})" if column is not None else ")")
        super().__init__(message + where)


class NonIntegerEntry(ParseError):
    pass
