from typing import Optional


class WorkbenchError(Exception):
    """Base class for every error raised by the workbench."""


class DomainError(WorkbenchError, ValueError):
    """An argument lies outside the domain of an operation (e.g. r <= 0)."""


class IntegralityError(WorkbenchError, ArithmeticError):
    """A value that must be an integer came out as a proper fraction."""


class PreconditionError(WorkbenchError, ValueError):
    """A documented precondition of an operation does not hold."""


class InvariantViolation(WorkbenchError, AssertionError):
    """An internal identity failed. Never expected to happen."""


class IndeterminateError(WorkbenchError):
    """Riemann-Roch data alone cannot decide the requested quantity."""


class VerificationFailure(WorkbenchError):
    """A verifier found a counterexample to a claimed statement."""

    def __init__(self, message: str, witness: Optional[dict] = None):
        super().__init__(message)
        self.witness = witness


class DocumentError(WorkbenchError, ValueError):
    """A request or input document is malformed."""

    def __init__(self, message: str, field: Optional[str] = None, line: Optional[int] = None):
        location = []
        if field:
            location.append(f"field '{field}'")
        if line is not None:
            location.append(f"line {line}")
        text = f"{message} ({', '.join(location)})" if location else message
        super().__init__(text)
        self.field = field
        self.line = line
