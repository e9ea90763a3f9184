"""Exception hierarchy shared by all modules."""


class OpanError(Exception):
    """Base class for every error raised by this package."""


class DSLSyntaxError(OpanError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"{message}{where}")


class DegreeError(DSLSyntaxError):
    """An entry mixes monomial degrees or disagrees with the declared order."""

    def __init__(self, message, entry, line=None, column=None):
        self.entry = entry
        super().__init__(message, line, column)


class ZeroOperatorError(OpanError):
    pass


class DimensionMismatchError(OpanError):
    pass


class SingularSymbolError(OpanError):
    """B*(xi)B(xi) is numerically singular at the requested point."""

    def __init__(self, message, min_singular_value, point=None):
        self.min_singular_value = min_singular_value
        self.point = point
        super().__init__(message)


class NotEllipticError(OpanError):
    def __init__(self, message, witness=None):
        self.witness = witness
        super().__init__(message)


class ExhaustionError(OpanError):
    """Direction budget ran out before the intersection stabilized."""

    def __init__(self, message, subspace=None):
        self.subspace = subspace
        super().__init__(message)


class MembershipError(OpanError):
    def __init__(self, message, minor=None):
        self.minor = minor
        super().__init__(message)


class IllConditionedFitError(OpanError):
    pass


class BandError(OpanError):
    pass


class ShapeMismatchError(OpanError):
    pass


class UnknownExponentError(OpanError):
    pass


class PreconditionError(OpanError):
    """The operator lacks a property the experiment needs."""

    def __init__(self, message, missing=None):
        self.missing = missing
        super().__init__(message)


class ResolutionError(OpanError):
    pass


class WitnessInvalidError(OpanError):
    pass


class CEllipticError(PreconditionError):
    """Raised when a boundary counterexample is requested for a C-elliptic operator."""
