"""Exception hierarchy shared by every sievelab module."""


class SieveLabError(Exception):
    """Base class for all sievelab errors."""


class InvalidArgument(SieveLabError, ValueError):
    """An argument violates an operation's precondition."""


class ResourceLimit(SieveLabError):
    """A request exceeds the configured memory or work budget, or 64-bit range."""


class OutOfTable(SieveLabError, IndexError):
    """A quantity needs table entries beyond ``x_max``."""


class DegenerateInput(SieveLabError, ValueError):
    """The inputs are valid but the requested quantity is undefined (e.g. 0/0)."""
