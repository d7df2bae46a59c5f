"""Exception types shared across the package."""


class HybridSecError(Exception):
    """Base class for all package errors."""


class GeometryError(HybridSecError, ValueError):
    """Invalid geometry or channel argument (non-positive distance, ...)."""


class QosInfeasibleError(HybridSecError):
    """The requested rate thresholds cannot be met for this channel draw."""


class SolverError(HybridSecError, RuntimeError):
    """An inner optimization failed in a way the caller cannot recover from."""


class ConfigError(HybridSecError, ValueError):
    """Malformed or invalid scenario configuration."""


class SweepError(HybridSecError, RuntimeError):
    """Too many trials failed at a sweep point."""
