"""Exception hierarchy shared by every permutab module."""

from __future__ import annotations

from typing import Any, Optional, Tuple

__all__ = [
    "PermutabError",
    "SignatureError",
    "AlgebraError",
    "TermError",
    "SizeMismatch",
    "FixtureError",
    "DocumentError",
    "ConfigError",
    "InvalidCategory",
    "CapExceeded",
    "InconsistencyError",
]


class PermutabError(ValueError):
    """Base class for malformed input (exit code 2 at the CLI)."""


class SignatureError(PermutabError):
    pass


class AlgebraError(PermutabError):
    pass


class TermError(PermutabError):
    """Term does not fit the signature or environment.

    ``position`` is the path of child indices from the root to the offending node.
    """

    def __init__(self, message: str, position: Tuple[int, ...] = ()) -> None:
        super().__init__(f"{message} (at position {list(position)})")
        self.position = tuple(position)


class SizeMismatch(PermutabError):
    pass


class FixtureError(PermutabError):
    pass


class DocumentError(PermutabError):
    def __init__(self, message: str, position: Optional[str] = None) -> None:
        super().__init__(f"{message} (at {position})" if position else message)
        self.position = position


class ConfigError(PermutabError):
    pass


class InvalidCategory(PermutabError):
    def __init__(self, message: str, report: Any = None) -> None:
        super().__init__(message)
        self.report = report


class CapExceeded(RuntimeError):
    """A configured enumeration bound was hit; results would be partial."""

    def __init__(self, what: str, limit: int, reached: int) -> None:
        super().__init__(f"{what}: cap {limit} exceeded (reached {reached})")
        self.what = what
        self.limit = limit
        self.reached = reached


class InconsistencyError(RuntimeError):
    """An invariant guaranteed by the mathematics did not hold."""
