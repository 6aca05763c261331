"""Exception hierarchy shared by every module of the package."""


class CausalValidityError(Exception):
    """Base class for all errors raised by :mod:`cbnvalidity`."""


class FamilyMismatchError(CausalValidityError):
    """Operands belong to different distribution families (finite vs Gaussian)."""


class VariableMismatchError(CausalValidityError):
    """Variable lists or names do not line up."""


class ShapeMismatchError(CausalValidityError):
    """A kernel or map has the wrong number of parents, inputs or outputs."""


class UnsupportedOperationError(CausalValidityError):
    """The operation is not defined for the given distribution family."""


class NotAnInterventionError(CausalValidityError):
    """A kernel replacement leaves the observational distribution unchanged."""


class PreconditionError(CausalValidityError):
    """A documented precondition of an operation does not hold."""


class AmbiguousInterventionError(CausalValidityError):
    """A low-level intervention has no unique high-level counterpart."""


class SearchBoundError(CausalValidityError):
    """An exhaustive search would exceed the configured size bound."""


class ScenarioError(CausalValidityError):
    """A scenario file is malformed or references unknown ids.

    Parameters
    ----------
    message : str
        Human readable description.
    line, column : int, optional
        One-based position in the source document when known.
    """

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"line {line}, column {column}: {message}"
        super().__init__(message)
