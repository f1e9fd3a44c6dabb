"""Exception hierarchy shared by every module.

The CLI maps these onto its exit-code contract, so raising the right
class is part of each function's interface:

    FormatError / ValidationError -> 2   (malformed or invariant-breaking input)
    OSError                       -> 3   (I/O, raised by the stdlib directly)
    SelectorError                 -> 4   (instance selector resolved nothing)
    ConfigError / TransportError  -> 5   (LLM relay configuration / HTTP)
    InvalidQueryError             -> 1   (semantically unusable query)
    GenerationError               -> 2   (synthetic scene placement failure)
"""

from __future__ import annotations


class SymsceneError(Exception):
    """Base class for all library errors."""


class FormatError(SymsceneError):
    """Input bytes do not parse. Carries a location when one is known."""

    def __init__(self, message: str, location: str | None = None):
        self.location = location
        super().__init__(message if location is None else f"{message} (at {location})")


class ValidationError(SymsceneError):
    """Input parsed but violates a declared invariant."""

    def __init__(self, message: str, location: str | None = None):
        self.location = location
        super().__init__(message if location is None else f"{message} (at {location})")


class SelectorError(SymsceneError):
    """A (class, ordinal) selector matched no instance."""


class InvalidQueryError(SymsceneError):
    """A query is missing the fields its kind requires."""


class ConfigError(SymsceneError):
    """LLM relay configuration is incomplete (detected before any network use)."""


class TransportError(SymsceneError):
    """LLM endpoint unreachable or returned an error / unusable payload."""

    def __init__(self, message: str, status: int | None = None):
        self.status = status
        super().__init__(message)


class GenerationError(SymsceneError):
    """Synthetic scene could not be generated under the requested constraints."""
