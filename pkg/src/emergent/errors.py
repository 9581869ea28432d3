"""Exception hierarchy shared by all modules."""


class EmergentError(Exception):
    """Base class for errors raised by this package."""


class IncompatibleScaleError(EmergentError, TypeError):
    """Two scale elements from different scale groups were combined."""


class NetError(EmergentError, ValueError):
    """A net does not move toward the absolute."""


class DomainError(EmergentError, ValueError):
    """An operation was evaluated outside the model's domain of definition."""


class NonLocalIntermediateError(DomainError):
    """A construction produced an intermediate point that cannot be used."""


class CarrierError(EmergentError, ValueError):
    """A point does not belong to the model's carrier."""


class CompositionError(EmergentError, ValueError):
    """Two arrows are not composable (or do not share a source)."""


class ConfigError(EmergentError, ValueError):
    """Invalid experiment configuration; ``field`` names the offending entry."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
