"""Exception taxonomy shared by all chancalc modules."""


class ChancalcError(Exception):
    """Base class for every error raised by this package."""


class DimensionMismatch(ChancalcError):
    """Operands have incompatible shapes or factor dimensions."""


class NotHermitian(ChancalcError):
    """Matrix fails the Hermitian symmetry check."""


class InvalidState(ChancalcError):
    """Vector or matrix fails density-matrix / pure-state validation."""


class NotCP(ChancalcError):
    """Choi matrix has a negative eigenvalue beyond tolerance."""


class NotCPTP(ChancalcError):
    """Map fails complete positivity or trace preservation."""


class NotSameChannel(ChancalcError):
    """Two dilations do not induce the same channel."""


class ShrinkNotAllowed(ChancalcError):
    """Dilation padding was asked to reduce the environment dimension."""


class NotHermiticityPreserving(ChancalcError):
    """Map lacks a Hermitian Choi matrix, required by this operation."""


class BadParameters(ChancalcError):
    """Arguments are outside the documented parameter domain."""


class NotAFactorization(ChancalcError):
    """Channel does not factor through the claimed broadcast structure."""


class DegenerateConstraints(ChancalcError):
    """SDP equality constraints are linearly dependent."""


class NumericalFailure(ChancalcError):
    """An iterative solver broke down; carries the last iterate info."""

    def __init__(self, message, info=None):
        super().__init__(message)
        self.info = dict(info or {})
