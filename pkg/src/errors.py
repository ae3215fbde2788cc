"""Exception hierarchy for the solver and its CLI."""


class KinwaveError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(KinwaveError, ValueError):
    """Invalid or incomplete run configuration."""


class MeasureError(KinwaveError, ValueError):
    """Invalid velocity measure or density specification."""


class ParameterError(KinwaveError, ValueError):
    """Physical parameter outside its admissible domain."""


class NumericalError(KinwaveError, RuntimeError):
    """Base class for numerical failures."""


class CollisionError(NumericalError):
    """Requested wave speed coincides with a discrete velocity."""


class BracketError(NumericalError):
    """Bisection bracket does not enclose a sign change."""


class PoleError(NumericalError):
    """Dispersion function evaluated at one of its poles."""


class NullSpaceError(NumericalError):
    """Transfer matrix null space is not one-dimensional."""


class AnsatzError(NumericalError):
    """Mode profile or assembled distribution lost positivity."""


class IntegrationError(NumericalError):
    """Fixed-step integration of the nutrient equation blew up."""


class RelaxationError(NumericalError):
    """Time-marching relaxation violated CFL or diverged."""


class ExtrapolationError(NumericalError):
    """One-sided limits across a discrete velocity did not stabilise."""


class ScanError(NumericalError):
    """Too many Upsilon evaluations of a scan failed."""
