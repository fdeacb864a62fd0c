"""Exception and warning types raised across the package."""


class MmgError(Exception):
    """Base class for all package errors."""


class InvalidRegime(MmgError, ValueError):
    """State or control outside the forward-motion regime (u > 0, n_P > 0)."""


class SingularMass(MmgError):
    pass


class DegenerateInflowWarning(UserWarning):
    """Rudder resultant inflow is zero; the rudder force was set to zero."""


class SimulationAborted(MmgError):
    """A rollout hit an invalid regime or a non-finite state."""

    def __init__(self, step, reason):
        self.step = step
        self.reason = reason
        super().__init__(f"simulation aborted at step {step}: {reason}")


class NonFiniteObjective(MmgError):
    pass


class DegenerateBox(MmgError, ValueError):
    pass


class UnknownParameter(MmgError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else "unknown parameter"


class ParseError(MmgError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class TrialValidationError(MmgError, ValueError):
    pass


class MissingManeuver(MmgError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else "missing maneuver"


class ConfigError(MmgError, ValueError):
    pass
