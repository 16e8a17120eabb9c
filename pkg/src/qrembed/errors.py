"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: usage errors -> 1, I/O errors -> 2,
DomainError -> 3, NumericError -> 4.
"""


class QrembedError(Exception):
    """Base class for all package-specific errors."""


class DomainError(QrembedError):
    """Input violates a documented precondition or invariant."""


class ParseError(DomainError):
    """Malformed input file; carries the offending line number."""

    def __init__(self, message, line_no=None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


class NumericError(QrembedError):
    """Non-finite values or numerical breakdown during computation."""


class DegenerateBlockError(QrembedError):
    """A sketch block lost rank during orthogonalization.

    Recoverable: the caller re-draws the random block.
    """
