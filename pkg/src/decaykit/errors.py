"""Exception hierarchy.

Everything raised on purpose derives from :class:`DecayKitError`.  The CLI
maps :class:`ConfigError` to exit status 2 and every other subclass to 3.
"""


class DecayKitError(Exception):
    """Base class for all library errors."""


class ConfigError(DecayKitError):
    """Unparseable or inconsistent scenario configuration."""


# special functions
class PoleOfGamma(DecayKitError):
    pass


class BranchCutViolation(DecayKitError):
    pass


class NonfiniteResult(DecayKitError):
    pass


class ZeroBase(DecayKitError):
    pass


# density of states
class GaussianRejected(DecayKitError):
    """A Gaussian form factor makes rho(-iy) unbounded on the negative imaginary axis."""


class NuOutOfRange(DecayKitError):
    pass


class SingleResonanceConstantFF(DecayKitError):
    """Constant form factor with a single pole forces a zero-width resonance."""


class ConstantFFConditionsViolated(DecayKitError):
    pass


class NegativeDensity(DecayKitError):
    pass


class NormalizationMismatch(DecayKitError):
    pass


class NarrowModeNotAllowed(DecayKitError):
    pass


# numerics
class QuadratureNonconvergence(DecayKitError):
    def __init__(self, message, error_estimate=None):
        super().__init__(message)
        self.error_estimate = error_estimate


class InsufficientSampling(DecayKitError):
    pass


# moments
class MomentDivergent(DecayKitError):
    pass


class MomentMismatch(DecayKitError):
    pass


class NegativeVariance(DecayKitError):
    pass


# autocorrelation
class WeightsNotNormalized(DecayKitError):
    pass


# regions
class NoIntersection(DecayKitError):
    pass


class DegenerateDenominator(DecayKitError):
    pass


class SinglePole(DecayKitError):
    pass
