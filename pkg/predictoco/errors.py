"""
Custom errors.
"""


class PredictocoError(Exception):
    """
    Base class for every error raised by predictoco.
    """

    pass


class InvalidInputError(PredictocoError, ValueError):
    """
    Error raised when an array has the wrong shape or a trace is missing a series.
    """

    pass


class InvalidParameterError(PredictocoError, ValueError):
    """
    Error raised when a schedule or solver parameter is outside its allowed range.
    """

    pass


class InvalidConfigurationError(PredictocoError):
    """
    Error raised when an algorithm, environment and schedule don't fit together.
    """

    pass


class GenerationError(PredictocoError):
    """
    Error raised when a generated environment breaks its declared bounds.
    """

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class UnsupportedDimensionError(PredictocoError):
    """
    Error raised when a grid oracle is asked to search more than two dimensions.
    """

    pass


class SettingsError(PredictocoError):
    """
    Error raised when a settings file fails validation. `field_paths` lists every
    offending key as a dotted path.
    """

    def __init__(self, message, field_paths=None):
        super().__init__(message)
        self.field_paths = list(field_paths or [])


class UnverifiedToleranceWarning(Warning):
    """
    The warning to raise when an inner solve stops before certifying its tolerance.
    """

    def __str__(self):
        return (
            "An inner solve reached max_iters without certifying its tolerance. "
            "The best iterate was used and the run is marked degraded."
        )
