"""Exception types shared across the package."""


class TokexError(Exception):
    """Base class for all tokex errors."""


class ValidationError(TokexError):
    """Invalid input: malformed files, broken invariants, bad arguments."""


class FormatError(ValidationError):
    """An on-disk artifact does not conform to its binary or JSON format."""


class InternalError(TokexError):
    """An invariant the library itself must uphold was violated."""
