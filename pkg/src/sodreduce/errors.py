"""Exception hierarchy. Every error is also a ``ValueError``."""


class SodError(ValueError):
    """Base class for errors raised by this package."""


class DimensionError(SodError):
    """Shapes are empty or do not line up."""


class ParameterError(SodError):
    """A scalar argument is outside its valid range."""


class ConditioningError(SodError):
    """A matrix that must have full column rank does not."""


class EmbeddingError(SodError):
    """No sampled embedding passed certification within the retry budget."""


class SamplingError(SodError):
    """A sampling distribution is degenerate (all mass zero)."""


class IngestError(SodError):
    """Input file could not be parsed."""
