"""Exception types shared across the package."""


class SlugSimError(Exception):
    """Base class for all package-specific errors."""


class ParameterDomainError(SlugSimError, ValueError):
    """A physical parameter is outside its allowed domain."""


class IntegrationStabilityError(SlugSimError, RuntimeError):
    """Phase velocities diverged; the time step is too large for the device."""


class BiasStateError(SlugSimError, RuntimeError):
    """Operation requires a finite-voltage bias but the device is superconducting."""


class NonlinearityError(SlugSimError, RuntimeError):
    """Probe amplitude drives the device outside the linear-response window."""


class GradientUndefinedError(SlugSimError, ValueError):
    """Grid too small to form the requested finite-difference derivative."""


class PassivityViolationError(SlugSimError, ValueError):
    """Extracted port resistances are not positive; gain formulas undefined."""


class SequenceValidationError(SlugSimError, ValueError):
    """Pulse sequence events overlap or are out of order."""


class OutputError(SlugSimError, OSError):
    """Artifact directory missing, unwritable, or otherwise unusable."""


class ConfigError(SlugSimError, ValueError):
    """Run configuration failed validation.

    Carries the dotted path of the offending field when known.
    """

    def __init__(self, message: str, field: str | None = None):
        self.field = field
        if field is not None:
            message = f"{field}: {message}"
        super().__init__(message)
