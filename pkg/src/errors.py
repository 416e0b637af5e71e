# errors.py
from typing import Any, Dict, Optional


class GerbeKitError(Exception):
    """Base class for failures that map onto a CLI exit status."""
    exit_code = 1

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.details = details or {}


class ValidationFailure(GerbeKitError):
    """An axiom, functoriality or naturality check failed."""
    exit_code = 1


class ConsistencyError(GerbeKitError):
    """Two independent computations of the same predicate disagreed."""
    exit_code = 1


class BudgetExceeded(GerbeKitError):
    """Enumeration or search ran past its step budget."""
    exit_code = 2

    def __init__(self, message: str, partial: Any = None, details: Optional[Dict[str, Any]] = None):
        super().__init__(message, details)
        self.partial = partial


class PreconditionError(GerbeKitError):
    """An operation was called on inputs outside its domain."""
    exit_code = 3


class InterchangeError(GerbeKitError):
    """A document could not be parsed; `location` is a line/column or a field path."""
    exit_code = 4

    def __init__(self, message: str, location: str = "", details: Optional[Dict[str, Any]] = None):
        super().__init__(f"{location}: {message}" if location else message, details)
        self.location = location
