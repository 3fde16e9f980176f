"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the physical domain of an operation."""


class ConfigurationError(ValueError):
    """A configuration object or constructor argument violates an invariant."""


class PropagationError(RuntimeError):
    """Pulse propagation produced an invalid result (e.g. FFT wraparound)."""


class MeasurementError(RuntimeError):
    """A pulse measurement could not be performed on the given data."""


class AmbiguityError(MeasurementError):
    """A measurement has several candidate answers (e.g. multi-modal pulse)."""


class FittingError(RuntimeError):
    """Nonlinear least-squares fitting failed."""


class RankDeficiencyError(FittingError):
    """The normal matrix is singular; names the unidentifiable direction."""


class SeedingError(FittingError):
    """Automatic parameter seeding failed on degenerate data."""


class SchemaError(ValueError):
    """A scenario configuration file violates the documented schema."""
