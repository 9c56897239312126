"""Exception hierarchy.

Validation errors (bad input) and numerical errors (integration failure)
are kept on separate branches so the CLI can map them to exit codes 1
and 2 respectively.
"""

from __future__ import annotations


class OptosyncError(Exception):
    """Base class for all package errors."""


# -- validation ---------------------------------------------------------


class ValidationError(OptosyncError):
    """Bad user input: parameters, configuration, axes."""


class InvalidParams(ValidationError):
    """One or more physical parameters violate their constraints.

    Carries the full list of violations; the raised class is the
    specific subclass when all violations share one kind.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        lines = "; ".join(str(v) for v in self.violations)
        super().__init__(f"invalid parameters: {lines}")


class NonPositiveRate(InvalidParams):
    """gamma_m, kappa or omega_m is zero or negative."""


class NegativeOccupation(InvalidParams):
    """Thermal occupation n_bar is negative."""


class ConfigError(ValidationError):
    """Configuration document is unusable."""


class ConfigSyntaxError(ConfigError):
    """Malformed line in a configuration document."""


class UnknownKey(ConfigError):
    """Configuration key is not part of the documented grammar."""


class ConflictingSource(ConfigError):
    """Both a preset name and inline parameters were given."""


class UnknownAxis(ValidationError):
    """Sweep axis does not name a scalar parameter field."""


class WindowTooShort(ValidationError):
    """Averaging window holds fewer than the minimum number of samples."""


# -- numerics -----------------------------------------------------------


class NumericalError(OptosyncError):
    """Integration or measure evaluation failed numerically."""


class NonFinite(NumericalError):
    """A derivative or state entry is NaN or infinite."""


class StepUnderflow(NumericalError):
    """Adaptive step size collapsed below 1e-12 time units."""


class Diverged(NumericalError):
    """Propagated state left the finite range."""


class PhysicalityLost(NumericalError):
    """Covariance violates the uncertainty bound beyond integration
    tolerance; signals integrator failure, not physics."""


class DegenerateVariance(NumericalError):
    """EPR variance sum is too small to invert."""


# -- output -------------------------------------------------------------


class SinkUnavailable(OptosyncError):
    """Output target cannot be opened or finalized."""
