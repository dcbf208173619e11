"""Exception hierarchy shared by every flatlab module."""


class FlatlabError(Exception):
    """Base class for all library errors."""


class DivisionByZero(FlatlabError, ZeroDivisionError):
    pass


class UnknownVariable(FlatlabError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class MixedCharts(FlatlabError, ValueError):
    pass


class ParseError(FlatlabError, ValueError):
    def __init__(self, message, line=None, column=None, source=None):
        self.line = line
        self.column = column
        self.source = source
        where = ""
        if line is not None:
            where = f" (line {line}, column {column})"
        if source:
            where = f" in {source}" + where
        super().__init__(message + where)


class NotValidOnChart(FlatlabError, ValueError):
    pass


class SingularMatrix(FlatlabError, ZeroDivisionError):
    pass


class JacobiFailure(FlatlabError, ValueError):
    def __init__(self, triple, residual):
        self.triple = triple
        self.residual = residual
        super().__init__(f"Jacobi identity fails at basis triple {triple}: {residual}")


class NotLeftSymmetric(FlatlabError, ValueError):
    pass


class NotAssociative(FlatlabError, ValueError):
    pass


class CapExceeded(FlatlabError, RuntimeError):
    pass


class NotFlat(FlatlabError, ValueError):
    def __init__(self, message, witness=None):
        self.witness = witness
        super().__init__(message)


class DependentFields(FlatlabError, ValueError):
    pass


class NotInfinitesimalAffine(FlatlabError, ValueError):
    def __init__(self, message, index=None):
        self.index = index
        super().__init__(message)


class NonPolynomialConnection(FlatlabError, ValueError):
    pass


class SingularFrame(FlatlabError, ValueError):
    pass


class UnknownName(FlatlabError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class InvalidPoint(FlatlabError, ValueError):
    pass


class GoldenMismatch(FlatlabError, AssertionError):
    def __init__(self, name, diff):
        self.name = name
        self.diff = diff
        super().__init__(f"golden mismatch for {name}:\n{diff}")
