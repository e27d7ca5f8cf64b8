"""Exception types shared across the package."""


class HyperAccelError(Exception):
    pass


class DivisionByZero(HyperAccelError, ZeroDivisionError):
    pass


class PoleEncountered(HyperAccelError, ZeroDivisionError):
    """A denominator vanished during exact evaluation.

    ``factor`` describes what vanished and ``index`` is the first offending
    summation (or shift) index, when one applies.
    """

    def __init__(self, message, factor=None, index=None):
        super().__init__(message)
        self.factor = factor
        self.index = index


class NonLinearFactor(HyperAccelError):
    pass


class DegreeMismatch(HyperAccelError):
    pass


class ZeroP2(HyperAccelError):
    pass


class UnknownAtom(HyperAccelError, KeyError):
    pass


class InsufficientScale(HyperAccelError):
    pass


class ParseError(HyperAccelError, ValueError):
    def __init__(self, message, line=None, column=None):
        where = ""
        if line is not None:
            where = f" (line {line}, column {column})" if column is not None else f" (line {line})"
        super().__init__(message + where)
        self.line = line
        self.column = column


class ValidationError(HyperAccelError, ValueError):
    pass
