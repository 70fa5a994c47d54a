"""Exception types shared across the package.

Two families matter to the CLI exit-code contract: input problems
(ParseError, DomainError) map to exit code 2, mathematical precondition
and certificate failures map to exit code 3.
"""


class QuatSurfError(Exception):
    """Base class for all package errors."""


class ParseError(QuatSurfError):
    """Malformed input file or flag value."""


class DomainError(QuatSurfError):
    """Numeric argument outside the mathematically valid domain."""


class NotImaginary(QuatSurfError):
    """Quaternion expected to be purely imaginary is not."""


class NotUnit(QuatSurfError):
    """Quaternion expected to have unit norm does not."""


class GridMismatch(QuatSurfError):
    """Operands live on different grids."""


class NotComplexStructure(QuatSurfError):
    """Field expected to square to -1 pointwise does not."""


class NotClosed(QuatSurfError):
    """One-form failed its closedness gate.

    Carries the offending residual in ``residual``.
    """

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class AllBranch(QuatSurfError):
    """Every node of the surface is a branch point (f_x ~ 0)."""


class MinimalPoint(QuatSurfError):
    """|H| below the floor on the whole working region."""


class NotGHIMC(QuatSurfError):
    """Surface failed the d*dH^-1 = 0 gate required by the transform."""


class ZeroDenominator(QuatSurfError):
    """A required inverse vanishes on the whole working region."""


class PathInconsistent(QuatSurfError):
    """Row-first and column-first path integration disagree beyond tolerance."""


class Blowup(QuatSurfError):
    """ODE state left the trusted range during integration."""


class Degenerate(QuatSurfError):
    """phi' + 2 sin phi degenerates; the revolution correspondence breaks."""


class NotRevolution(QuatSurfError):
    """Surface is not rotationally symmetric about the k-axis in grid coordinates."""


class NotConformal(QuatSurfError):
    """Conformality certificate (sin^2 + cos^2 = 1) failed."""


class SeedConstraintViolated(QuatSurfError):
    """Equivariant seeds do not satisfy the algebraic y-constraints."""


class NotClassical(QuatSurfError):
    """Darboux transform failed the classicality residual gate."""
