# core/errors.py

from typing import Any, Optional


class UcoverError(Exception):
    """Base class for every error raised by the toolkit."""


class DomainError(UcoverError, ValueError):
    """An argument lies outside the domain of the operation (e.g. n < 3)."""


class PreconditionError(UcoverError, ValueError):
    """Inputs violate a documented precondition."""


class MalformedWindowError(PreconditionError):
    def __init__(self, index: int, window: Any):
        super().__init__(f"malformed window at i={index}: {tuple(window)} repeats a point")
        self.index = index
        self.window = tuple(window)


class ConstructionError(UcoverError, RuntimeError):
    """A construction could not produce a verified object."""

    def __init__(self, msg: str, report: Optional[Any] = None, witness: Optional[Any] = None):
        super().__init__(msg)
        self.report = report
        self.witness = witness


class FixtureParseError(UcoverError, ValueError):
    def __init__(self, line_no: int, msg: str):
        super().__init__(f"line {line_no}: {msg}")
        self.line_no = line_no


class NotAvailableError(UcoverError, LookupError):
    """Requested design is neither bundled nor cached."""


class SearchBudgetError(UcoverError, RuntimeError):
    """A bounded search ran out of budget without an answer."""
