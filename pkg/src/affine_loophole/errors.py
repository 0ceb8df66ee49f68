"""Exception hierarchy shared by all modules."""


class LoopholeError(ValueError):
    """Base class for every error raised by this package."""


class DimensionError(LoopholeError):
    pass


class InvalidStateError(LoopholeError):
    pass


class InvalidBlochError(InvalidStateError):
    pass


class ContractError(LoopholeError):
    """A documented precondition was violated by the caller."""


class DeviceSaturatedError(LoopholeError):
    """The threshold removes at least all expected counts (N*theta >= T)."""


class DegenerateDataError(LoopholeError):
    """A count table has no mass left to normalize."""
