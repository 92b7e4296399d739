"""Exception hierarchy.

Every error carries an ``exit_code`` used by the command-line front end:
2 for usage/argument problems, 3 for data and format problems, 4 for
numeric problems.
"""

from __future__ import annotations


class TopoFCError(Exception):
    exit_code = 1


class ArgumentError(TopoFCError, ValueError):
    exit_code = 2


class DimensionError(ArgumentError):
    pass


class EmptySetError(ArgumentError):
    pass


class DataError(TopoFCError):
    exit_code = 3


class FormatError(DataError):
    pass


class ParseError(DataError):
    def __init__(self, path, lineno: int, message: str):
        self.path = str(path)
        self.lineno = lineno
        super().__init__(f"{self.path}:{lineno}: {message}")


class CrossGraphEdgeError(DataError):
    pass


class PolicyError(DataError):
    pass


class DegenerateFeatureError(DataError):
    pass


class DegenerateLabelsError(DataError):
    pass


class StratificationError(DataError):
    pass


class NumericError(TopoFCError, ArithmeticError):
    exit_code = 4
