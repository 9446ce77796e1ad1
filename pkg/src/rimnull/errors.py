"""Exception types raised by rimnull."""


class RimNullError(Exception):
    """Base class for all rimnull errors."""


class DomainError(RimNullError, ValueError):
    pass


class InfeasibleCalibrationError(RimNullError):
    pass


class EmptyRimError(RimNullError):
    pass


class SingularDistanceError(RimNullError):
    pass


class QuadratureError(RimNullError):
    """Fixed-dish quadrature did not converge under grid refinement."""


class DegenerateConstraintError(RimNullError):
    pass


class ConditioningError(RimNullError):
    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class DivergenceError(RimNullError):
    pass


class InstanceTooLargeError(RimNullError):
    pass


class ConfigError(RimNullError):
    pass
