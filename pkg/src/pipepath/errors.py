"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Bad input data (malformed matrix, inconsistent sizes, out-of-range ids).

    ``row`` / ``col`` locate the offending matrix entry when that makes sense.
    """

    def __init__(self, message, row=None, col=None):
        if row is not None and col is not None:
            message = f"{message} (row {row}, col {col})"
        elif row is not None:
            message = f"{message} (row {row})"
        super().__init__(message)
        self.row = row
        self.col = col


class InfeasibleError(RuntimeError):
    """No schedule/path exists under the given constraints."""
