"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: :class:`DataError` subclasses exit with
2 and :class:`NumericError` subclasses with 3.
"""

from __future__ import annotations


class StructGNNError(Exception):
    """Base class for all package errors."""

    code = "Error"


class DataError(StructGNNError):
    """Problem with input data (SMILES, CSV, model files)."""


class NumericError(StructGNNError):
    """Problem arising inside numerical computation."""


# -- SMILES ------------------------------------------------------------------


class SmilesError(DataError):
    """Base class for SMILES parse failures.

    ``code`` is a stable machine-readable reason used in ingest reports.
    """

    code = "SmilesError"

    def __init__(self, message: str, smiles: str | None = None, position: int | None = None):
        self.smiles = smiles
        self.position = position
        if smiles is not None and position is not None:
            message = f"{message} at position {position} in {smiles!r}"
        elif smiles is not None:
            message = f"{message} in {smiles!r}"
        super().__init__(message)


class EmptyInput(SmilesError):
    code = "EmptyInput"


class UnclosedRing(SmilesError):
    code = "UnclosedRing"


class UnbalancedParen(SmilesError):
    code = "UnbalancedParen"


class UnknownElement(SmilesError):
    code = "UnknownElement"


class ValenceError(SmilesError):
    code = "ValenceError"


class MultiFragment(SmilesError):
    code = "MultiFragment"


class SmilesSyntaxError(SmilesError):
    code = "SyntaxError"


# -- datasets and files --------------------------------------------------------


class MissingColumn(DataError):
    code = "MissingColumn"


class FileUnreadable(DataError):
    code = "FileUnreadable"


class AllRowsRejected(DataError):
    code = "AllRowsRejected"


class DatasetTooSmall(DataError):
    code = "DatasetTooSmall"


class VersionMismatch(DataError):
    code = "VersionMismatch"


class CorruptFile(DataError):
    code = "CorruptFile"


class EmptyBatch(DataError):
    code = "EmptyBatch"


class NoLabels(DataError):
    code = "NoLabels"


# -- numerics ----------------------------------------------------------------


class ShapeMismatch(NumericError):
    code = "ShapeMismatch"


class NonFiniteValue(NumericError):
    code = "NonFiniteValue"


class ZeroVariance(NumericError):
    code = "ZeroVariance"


class EmptyNodeSet(NumericError):
    code = "EmptyNodeSet"
