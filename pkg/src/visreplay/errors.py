"""Exception hierarchy shared by every stage of the engine."""


class VisReplayError(Exception):
    """Base class for all engine errors."""


class ConfigError(VisReplayError, ValueError):
    pass


class ContractError(VisReplayError, ValueError):
    """A caller broke a documented precondition."""


class BoundsError(ContractError):
    pass


class TextProviderError(VisReplayError):
    pass


class ScreenNotFound(VisReplayError):
    pass


class AmbiguousScreen(VisReplayError):
    pass


class PageNotFound(VisReplayError, KeyError):
    pass


class DeviceIOError(VisReplayError):
    pass


class RecordError(VisReplayError):
    pass
