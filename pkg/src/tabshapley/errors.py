"""Exception hierarchy.

Input problems (bad files, bad matrices) derive from ``InputError`` and map to
CLI exit code 2; configuration problems derive from ``ConfigError`` and map to
exit code 3.
"""


class TabShapleyError(Exception):
    """Base class for all errors raised by this package."""


class InputError(TabShapleyError):
    """Malformed or inconsistent input data."""

    def __init__(self, message, path=None, row=None, column=None):
        self.path = path
        self.row = row
        self.column = column
        where = []
        if path is not None:
            where.append(f"file {path}")
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)


class MissingCell(InputError):
    pass


class DuplicateAttributeName(InputError):
    pass


class EmptyTable(InputError):
    pass


class UnparseableValue(InputError):
    pass


class UnparseableLabel(InputError):
    pass


class DimensionMismatch(InputError):
    pass


class NegativeError(InputError):
    pass


class NonFiniteError(InputError):
    pass


class BlockTooLarge(InputError):
    pass


class ConfigError(TabShapleyError):
    """Invalid parameters."""


class InvalidAlpha(ConfigError):
    pass


class InvalidK(ConfigError):
    pass


class TooManyPlayers(TabShapleyError):
    pass


class MatrixTooLarge(TabShapleyError):
    pass


class LengthMismatch(TabShapleyError):
    pass


class NotDefined(TabShapleyError):
    """Raised when a correlation is undefined because both inputs are constant."""
