"""Exception types raised by the solver and its helpers."""


class VefsError(Exception):
    """Base class for all package errors."""


class NotPositiveDefinite(VefsError, ValueError):
    pass


class DegenerateTrace(VefsError, ValueError):
    pass


class DegenerateSystem(VefsError, ValueError):
    pass


class SingularSystem(VefsError, ValueError):
    pass


class CutoffExceeded(VefsError, ValueError):
    """tr c reached the FENE-P extensibility limit l2."""

    def __init__(self, message, location=None):
        super().__init__(message)
        self.location = location


class SizeMismatch(VefsError, ValueError):
    pass


class DegenerateDenominator(VefsError, ZeroDivisionError):
    pass


class PerturbationTooLarge(VefsError, ValueError):
    pass


class BlowUp(VefsError, RuntimeError):
    """A run produced non-finite or otherwise unusable state.

    Carries the simulation time, a short reason string and, when known,
    the physical (x, y) location of the offending grid point.
    """

    def __init__(self, t, reason, location=None):
        super().__init__(f"blow-up at t={t:g}: {reason}")
        self.t = t
        self.reason = reason
        self.location = location


class ConfigError(VefsError, ValueError):
    pass


class MissingSnapshot(VefsError, FileNotFoundError):
    pass


class UnknownQuantity(VefsError, KeyError):
    pass
