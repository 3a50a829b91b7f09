"""Exception types shared across the package."""


class ConeModuliError(Exception):
    """Base class for all package errors."""


class AngleOutOfRange(ConeModuliError):
    """A cone-angle parameter lies outside the open interval (0, 1)."""


class GaussBonnetViolated(ConeModuliError):
    """The angle parameters do not sum to 2 within tolerance."""


class PunctureTooClose(ConeModuliError):
    """Two punctures (or singular centers) are closer than the allowed separation."""


class EvalAtPole(ConeModuliError):
    """Evaluation requested at (or too close to) a pole/puncture."""


class QuadDiffConstraintViolated(ConeModuliError):
    """Residues fail the sum constraints of an integrable quadratic differential."""


class NonIntegrableProfile(ConeModuliError):
    """The declared singularity profile fails the convergence certificate."""


class ToleranceNotReached(ConeModuliError):
    """Adaptive refinement exhausted its depth before meeting the target.

    The engine does not raise this by default; it returns the best value with
    a flag. Raised only when the caller demands convergence.
    """


class HolderDataMissing(ConeModuliError):
    """A principal-value integral needs the integrand's Holder value at the pole."""


class SingularCometric(ConeModuliError):
    """The cometric Gram matrix is numerically singular."""


class FDStepDegenerate(ConeModuliError):
    """A finite-difference step is below the noise floor or above the geometry scale."""


class ConfigInvalid(ConeModuliError):
    """An experiment configuration failed validation."""


class IoFailure(ConeModuliError):
    """A report could not be written or read."""
