"""Exception types shared across the package."""


class MpsylvError(Exception):
    """Base class for all package-specific errors."""


class DimensionError(MpsylvError, ValueError):
    """Operands have inconsistent shapes."""


class SingularMatrixError(MpsylvError):
    """An exactly zero pivot was met while factorizing a matrix."""


class SingularEquationError(MpsylvError):
    """A triangular Sylvester recurrence met an exactly singular diagonal pair.

    Carries the (row, column) position of the offending pair.
    """

    def __init__(self, row: int, col: int):
        super().__init__(f"singular diagonal pair at position ({row}, {col})")
        self.row = row
        self.col = col


class NumericBreakdownError(MpsylvError):
    """A NaN or infinity appeared in the middle of a recurrence."""


class RankDeficiencyError(MpsylvError):
    """A QR factorization found the input numerically rank deficient."""


class NotHermitianError(MpsylvError, ValueError):
    """An operation requiring a Hermitian matrix received a non-Hermitian one."""


class IterationLimitError(MpsylvError):
    """An iterative factorization failed to converge within its sweep budget."""


class FormatOverflowError(MpsylvError):
    """A matrix entry is not representable in the requested format."""


class PrecisionOverflowWarning(RuntimeWarning):
    """A finite value overflowed to infinity while being rounded into a format."""
