"""Exception hierarchy shared by all modules."""


class HCMUError(Exception):
    """Base class for every domain error raised by the package."""


# one-forms
class FormError(HCMUError):
    pass


class ResidueSumNonzero(FormError):
    pass


class DuplicatePole(FormError):
    pass


class TooFewPoles(FormError):
    pass


class EvaluationAtPole(FormError):
    pass


class RootFindingFailure(FormError):
    pass


class AmbiguousContour(FormError):
    pass


# plans / existence
class InvalidPlan(HCMUError):
    pass


class InfeasiblePlan(HCMUError):
    pass


class NegativeSaddleBudget(InfeasiblePlan):
    pass


class NoCusps(InfeasiblePlan):
    pass


class NoMaxima(InfeasiblePlan):
    pass


class SaddleCountMismatch(InfeasiblePlan):
    pass


class LambdaMismatch(InfeasiblePlan):
    pass


class SynthesisUnsupported(HCMUError):
    pass


class ZeroPoleCollision(HCMUError):
    pass


# curvature
class DomainError(HCMUError, ValueError):
    pass


class ConvergenceFailure(HCMUError):
    pass


class BadNormalization(HCMUError):
    pass


# metric / verification
class UnclassifiablePole(HCMUError):
    pass


class StencilTooClose(HCMUError):
    pass


class RadiusTooLarge(HCMUError):
    pass


class NotACusp(HCMUError):
    pass


class QuadratureBudgetExceeded(HCMUError):
    pass


class ConfigError(HCMUError):
    """Malformed run configuration or bundle; carries a field path."""

    def __init__(self, message: str, path: str = ""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)
