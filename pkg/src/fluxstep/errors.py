"""Exception types shared across the package."""


class FluxstepError(Exception):
    """Base class for all package-specific errors."""


class ConfigurationError(FluxstepError, ValueError):
    """Invalid configuration value, shape mismatch, or unknown config key."""


class UsageError(FluxstepError, ValueError):
    """API misuse: bad index ranges, stale caches, mismatched grids."""


class ModelError(FluxstepError, ValueError):
    """Model evaluation produced an unusable value (e.g. non-finite sample)."""


class StateValidityError(ModelError):
    """Euler state violates positivity of density or internal energy."""


class NumericalError(FluxstepError, ArithmeticError):
    """Non-finite value produced inside a numerical kernel."""


class TrainingError(FluxstepError, RuntimeError):
    """Training step aborted; message carries step/iteration diagnostics."""
