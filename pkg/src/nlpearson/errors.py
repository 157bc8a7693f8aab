"""Exception hierarchy shared by all modules."""


class NlpError(Exception):
    """Base class for all library errors."""


class ParameterError(NlpError, ValueError):
    """A constructor parameter is outside its documented domain."""


class DomainError(NlpError, ValueError):
    """An evaluation point is outside the state space / spectral domain."""


class SpectrumBoundError(NlpError, ValueError):
    """A discrete index exceeds the last valid eigenvalue index."""


class NumericError(NlpError, ArithmeticError):
    """A numerical procedure failed its internal consistency check.

    Carries a ``diagnostics`` dict with whatever the failing routine knew
    (method, disagreement magnitude, parameters).
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class TruncationError(NlpError, ArithmeticError):
    """A series tail bound cannot be met at the configured truncation."""


class ResolutionError(NlpError, ValueError):
    """Sampled data are too coarse for the requested quadrature."""


class DatumError(NlpError, ValueError):
    """An initial datum is outside the admissible class."""


class ConfigError(NlpError, ValueError):
    """A CLI/job configuration is malformed."""


class SimulationError(NlpError, ValueError):
    """The requested simulation is not supported for this descriptor."""


class UsageError(NlpError, ValueError):
    """An operation was applied to data that do not carry the required provenance."""
