"""Exception hierarchy shared by the library and the CLI exit codes."""

from __future__ import annotations


class AltlabError(Exception):
    """Base class for all errors raised by altlab."""


class InputError(AltlabError, ValueError):
    """Malformed or inconsistent user input (CLI exit code 2)."""


class RegexSyntaxError(InputError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at offset {position}")
        self.position = position


class AutomatonFormatError(InputError):
    pass


class AlphabetMismatch(InputError):
    pass


class ResourceCapExceeded(AltlabError):
    """A configured size or time budget was exhausted (CLI exit code 3)."""


class InternalInconsistency(AltlabError):
    """A self-check failed; indicates a bug rather than bad input (exit code 4)."""
