"""Exception hierarchy shared by all modules."""


class HDLError(Exception):
    """Base class for errors raised by :mod:`hdl`."""


class InvalidInputError(HDLError, ValueError):
    """Raised when an argument is malformed (non-finite entries, bad shapes)."""


class DimensionMismatchError(InvalidInputError):
    """Raised when operands live on incompatible spaces."""


class DomainError(InvalidInputError):
    """Raised when a point lies outside the domain of a function, e.g. ``|z| >= 1``."""


class NotUnitaryError(HDLError):
    """Raised when a matrix required to be unitary is not.

    The attribute ``residual`` holds ``||U^H U - I||_F``.
    """

    def __init__(self, residual, msg=None):
        super().__init__(msg or f"matrix is not unitary: ||U^H U - I||_F = {residual:.3e}")
        self.residual = residual


class NotPSDError(HDLError):
    """Raised when a Hermitian matrix has a significantly negative eigenvalue."""

    def __init__(self, min_eigenvalue):
        super().__init__(f"matrix is not positive semidefinite: min eigenvalue {min_eigenvalue:.3e}")
        self.min_eigenvalue = min_eigenvalue


class NotContractionError(HDLError):
    """Raised when ``||T||_2`` exceeds one beyond tolerance."""

    def __init__(self, norm):
        super().__init__(f"operator is not a contraction: ||T||_2 = {norm:.17g}")
        self.norm = norm


class NumericalSingularityError(HDLError):
    """Raised when a linear system is too ill-conditioned to trust its solution.

    The attribute ``condition`` holds the 2-norm condition estimate.
    """

    def __init__(self, condition, msg=None):
        super().__init__(msg or f"numerically singular system: condition {condition:.3e}")
        self.condition = condition


class BoundarySingularityError(NumericalSingularityError):
    """Raised when ``I - z T^H`` is singular at a requested point (typically ``|z| = 1``)."""


class ConstructionInconsistencyError(HDLError):
    """Raised when a constructed object fails one of its defining identities."""

    def __init__(self, what, residual):
        super().__init__(f"construction inconsistency in {what}: residual {residual:.3e}")
        self.what = what
        self.residual = residual


class InvalidMeasureError(InvalidInputError):
    """Raised when an operation needs a valid measure and receives an invalid one.

    The attribute ``report`` holds the :class:`~hdl.ov_measures.ValidationReport`.
    """

    def __init__(self, report):
        super().__init__(f"invalid measure: {report}")
        self.report = report
