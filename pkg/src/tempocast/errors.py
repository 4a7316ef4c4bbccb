"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: ConfigError -> 2, DataError -> 3,
anything else -> 4.
"""


class ConfigError(ValueError):
    """Invalid configuration or argument values, detected before any work."""


class DataError(RuntimeError):
    """Input data that cannot be used (malformed rows, empty populations)."""


class CsvError(DataError):
    """Malformed CSV content; message carries the line number and column."""

    def __init__(self, line_number: int, column: str, detail: str):
        self.line_number = line_number
        self.column = column
        super().__init__(f"line {line_number}, column {column!r}: {detail}")


class TimestampError(DataError):
    """Timestamp string that cannot be placed on the month axis."""
