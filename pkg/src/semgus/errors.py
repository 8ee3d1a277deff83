"""Exception hierarchy shared by all toolkit stages.

Every error that can be traced to a span of input text carries a
:class:`Location` so command-line diagnostics can print ``file:line:col``.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Location:
    line: int
    col: int
    file: str | None = None

    def __str__(self) -> str:
        if self.file:
            return f"{self.file}:{self.line}:{self.col}"
        return f"{self.line}:{self.col}"


class SemgusError(Exception):
    """Base class for all toolkit errors."""

    def __init__(self, message: str, loc: Location | None = None):
        super().__init__(message)
        self.message = message
        self.loc = loc

    def __str__(self) -> str:
        if self.loc is not None:
            return f"{self.loc}: {self.message}"
        return self.message

    def with_file(self, filename: str) -> "SemgusError":
        if self.loc is not None and self.loc.file is None:
            self.loc = Location(self.loc.line, self.loc.col, filename)
        return self


# --- lexical / reader errors -------------------------------------------------

class ParseError(SemgusError):
    pass


class UnbalancedParensError(ParseError):
    pass


class BadTokenError(ParseError):
    pass


class UnterminatedStringError(ParseError):
    pass


# --- command analysis errors -------------------------------------------------

class AnalysisError(SemgusError):
    pass


class UnknownCommandError(AnalysisError):
    pass


class CommandFormatError(AnalysisError):
    pass


class DuplicateDeclarationError(AnalysisError):
    pass


class UnresolvedNameError(AnalysisError):
    pass


class ArityMismatchError(AnalysisError):
    pass


class SortMismatchError(SemgusError):
    pass


class AbsentSynthTargetError(AnalysisError):
    pass


class MissingCheckSynthError(AnalysisError):
    pass


class EmptySemanticsError(AnalysisError):
    pass


# --- semantics desugaring errors ----------------------------------------------

class NonExhaustiveMatchError(AnalysisError):
    def __init__(self, message: str, missing: tuple[str, ...] = (), loc: Location | None = None):
        super().__init__(message, loc)
        self.missing = missing


class UnknownConstructorError(UnresolvedNameError):
    pass


class DuplicateArmError(AnalysisError):
    pass


class IllSortedError(SemgusError):
    pass


# --- operationalization errors -------------------------------------------------

class OperationalizationError(SemgusError):
    pass


class DoubleWriteError(OperationalizationError):
    def __init__(self, message: str, variable: str, loc: Location | None = None):
        super().__init__(message, loc)
        self.variable = variable


class CyclicDataflowError(OperationalizationError):
    def __init__(self, message: str, cycle: tuple[int, ...] = (), loc: Location | None = None):
        super().__init__(message, loc)
        self.cycle = cycle


class UngroundedInputError(OperationalizationError):
    def __init__(self, message: str, variable: str, loc: Location | None = None):
        super().__init__(message, loc)
        self.variable = variable


class MissingModesError(OperationalizationError):
    pass


class NotOperationalizableError(SemgusError):
    pass


# --- evaluation errors ----------------------------------------------------------

class EvalError(SemgusError):
    pass


class UnboundVariableError(EvalError):
    pass


class DivByZeroError(EvalError):
    pass


class MissingPlanError(EvalError):
    pass


class IncompleteTermError(EvalError):
    pass


class UnsupportedConstraintError(EvalError):
    """Constraint shape the example-based checker cannot evaluate."""


# --- logical verification errors ------------------------------------------------

class VerificationError(SemgusError):
    pass


class UnsupportedSortError(VerificationError):
    pass


class SolverCrashError(VerificationError):
    pass


class ModelParseError(VerificationError):
    pass


class SolverNotFoundError(VerificationError):
    pass


# --- interop errors ---------------------------------------------------------------

class UnsupportedTheoryError(SemgusError):
    pass


class HigherOrderConstraintError(SemgusError):
    pass


# --- resource limits ----------------------------------------------------------------

class MemoryBudgetExceeded(SemgusError):
    pass
