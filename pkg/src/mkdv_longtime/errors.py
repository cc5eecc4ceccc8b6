"""Exception types raised across the package."""


class MKdVError(Exception):
    """Base class; carries an optional context dict for machine-readable reports."""

    def __init__(self, message, **context):
        super().__init__(message)
        self.context = context

    def to_dict(self):
        return {"error": type(self).__name__, "message": str(self), **self.context}


class NonConvergence(MKdVError):
    pass


class OutOfRange(MKdVError):
    pass


class BlowUp(MKdVError):
    pass


class ToleranceFailure(MKdVError):
    pass


class QuadratureFailure(MKdVError):
    pass


class Ambiguous(MKdVError):
    pass


class ConfigError(MKdVError):
    pass


class WrapAroundWarning(UserWarning):
    """Boundary-window energy exceeded the wrap-around threshold."""
