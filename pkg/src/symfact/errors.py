"""Exception types shared across the package.

The CLI maps these onto its stable exit codes (see cli.py):
parse errors -> 3, size-cap errors -> 4, precondition/numeric errors -> 5.
"""


class DimensionError(ValueError):
    """Input vector/matrix dimensions do not match the operator."""


class SizeCapError(ValueError):
    """A dense materialization was requested above the desk-scale cap."""


class PreconditionError(ValueError):
    """A documented precondition of an operation was violated."""


class NumericError(RuntimeError):
    """A numerical failure (singular or too ill-conditioned input)."""


class ParseError(ValueError):
    """A document could not be parsed; carries the location of the problem."""

    def __init__(self, message, path=""):
        self.path = path
        super().__init__(f"{message} (at {path})" if path else message)
