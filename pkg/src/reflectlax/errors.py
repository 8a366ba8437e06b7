"""Exception hierarchy.

Every error raised by the library derives from :class:`ReflectLaxError` so
callers (and the CLI) can catch the whole family at once.
"""


class ReflectLaxError(Exception):
    pass


class InputError(ReflectLaxError, ValueError):
    """Malformed arguments: wrong shapes, wrong tensor order, bad labels."""


class NondegeneracyError(ReflectLaxError):
    """A bilinear form that must be nondegenerate is singular."""


class UnsupportedError(ReflectLaxError):
    pass


class EvaluationError(ReflectLaxError):
    """An observable or its derivative evaluated to a non-finite value."""


class StiffnessError(ReflectLaxError):
    pass


class DivergenceError(ReflectLaxError):
    pass


class ConventionMismatchError(ReflectLaxError):
    pass


class DomainError(ReflectLaxError, ValueError):
    pass


class ConditioningError(ReflectLaxError):
    pass


class RangeError(ReflectLaxError, OverflowError):
    pass


class NumericalError(ReflectLaxError):
    pass


class PoleError(DomainError):
    pass


class LeafMismatchError(DomainError):
    pass


class DegenerateParameterizationError(DomainError):
    pass


class ConfigError(ReflectLaxError):
    """Configuration could not be parsed or validated."""
