"""Exception types shared across the package."""


class HeadBalanceError(Exception):
    """Base class for all domain errors raised by this package."""


class ParseError(HeadBalanceError):
    """An input file could not be parsed at all."""


class ValidationError(HeadBalanceError):
    """A parsed value violates a structural invariant."""


class InfeasibleError(HeadBalanceError):
    """No valid assignment exists for the requested configuration."""


class SearchSpaceError(HeadBalanceError):
    """An enumeration exceeded its configured size cap."""


class CalibrationError(HeadBalanceError):
    """Latency-model fitting failed (bad sample set or degenerate fit)."""


class SimulationError(HeadBalanceError):
    """Simulation inputs are inconsistent or degenerate."""
