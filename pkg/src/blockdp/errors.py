"""Exception types shared across the package."""


class BlockdpError(Exception):
    """Base class for all package-specific errors."""


class InputError(BlockdpError, ValueError):
    """Invalid user-supplied data or parameters."""


class StateMismatchError(InputError):
    """An incremental state was fed cells, a model, or a penalty it was not built with."""


class InternalError(BlockdpError, RuntimeError):
    """An internal invariant was violated.  Indicates a bug, not bad input."""
