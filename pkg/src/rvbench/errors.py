"""Exception hierarchy shared across the toolkit.

The CLI maps these onto exit codes: bad usage is 1 (argparse), DataError
and subclasses are 2, EstimationError is 3.
"""

from __future__ import annotations


class RvBenchError(Exception):
    """Base class for all toolkit errors."""


class DataError(RvBenchError):
    """Invalid input data: domain violations, empty windows, bad values."""


class FormatError(DataError):
    """Malformed file contents: wrong header, unparseable row, bad schema."""


class EstimationError(RvBenchError):
    """Model fitting failed (non-convergence, degenerate design, ...).

    ``partial`` optionally carries the best-so-far parameter estimate.
    """

    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial


class DegenerateInputError(DataError):
    """Statistic undefined because the input has no variation."""
