# core/errors.py - Exception hierarchy shared by every module
from typing import List, Optional


class FreeCSLError(Exception):
    """Base class for all library errors"""


class DatasetLoadError(FreeCSLError, FileNotFoundError):
    """A dataset file is missing or unreadable"""


class DatasetFormatError(FreeCSLError, ValueError):
    """A dataset file is malformed (ragged rows, bad meta, dimension mismatch)"""


class DataValidationError(FreeCSLError, ValueError):
    """Dataset content violates an invariant (labels out of range, empty rows in mask)"""


class UnsatisfiableMaskError(FreeCSLError, ValueError):
    """The requested missing pattern cannot be produced"""


class ViewIndexError(FreeCSLError, IndexError):
    """A view id is outside [0, V)"""


class ShapeError(FreeCSLError, ValueError):
    """Array shapes disagree"""


class ConfigError(FreeCSLError, ValueError):
    """A hyperparameter or experiment setting is invalid"""


class ContractViolationError(FreeCSLError, ValueError):
    """A documented precondition does not hold"""


class GraphError(FreeCSLError, ValueError):
    """Adjacency is not a valid undirected graph for the requested operation"""


class ClusteringError(FreeCSLError, ValueError):
    """k-means cannot be run on the given points"""


class NonFiniteError(FreeCSLError, ArithmeticError):
    """A parameter, score or loss is NaN or infinite"""


class TrainingDivergedError(NonFiniteError):
    """Training produced a non-finite loss; carries the reports gathered so far"""

    def __init__(self, message: str, component: str, reports: Optional[List] = None):
        super().__init__(message)
        self.component = component
        self.reports = reports or []
