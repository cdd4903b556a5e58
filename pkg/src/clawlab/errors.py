"""Exception types shared across the package."""


class ClawError(Exception):
    """Base class for all clawlab errors."""


class UnknownFlux(ClawError):
    """Requested catalog name is not registered."""


class NonFiniteFlux(ClawError):
    """Flux evaluation produced NaN or infinity on a sample set."""


class SingularPoint(ClawError):
    """Spatial derivative requested exactly at a declared singular point."""


class QuadratureNonConvergent(ClawError):
    """Adaptive quadrature hit its depth limit before reaching tolerance."""


class BadWindow(ClawError):
    """Time-window parameters violate 0 < rho < tau < t_max constraints."""


class CFLViolation(ClawError):
    """Computed time step is non-positive or non-finite."""


class BlowUp(ClawError):
    """Numerical solution exceeded its a-priori bound."""


class GridMismatch(ClawError):
    """Two fields do not share grid geometry or stored time levels."""


class SupportExceedsDomain(ClawError):
    """Test-function support is not contained in the field's space-time box."""


class MissingTimeLevels(ClawError):
    """Stored time levels do not cover the requested quadrature window."""


class EmptyCone(ClawError):
    """The shrinking ball is already empty at the first usable time level."""


class SampleNearShock(ClawError):
    """A diagnostic sample point landed on a discontinuity cell."""


class ConfigError(ClawError):
    """Experiment configuration is malformed; message carries line/key context."""
