"""Exception types shared across the package."""


class ConvergenceError(RuntimeError):
    """An iterative numerical procedure exhausted its budget without converging."""


class ConfigurationError(RuntimeError):
    """A scenario or selection is inconsistent (e.g. ambiguous spectral attribution)."""
