"""Exception hierarchy. The CLI maps ConfigError to exit code 2 and NumericalError to 3."""


class ConfigError(ValueError):
    pass


class NumericalError(RuntimeError):
    pass


class TruncationError(ValueError):
    """Fock cutoff too small for the requested coherent amplitude."""


class LabelingError(NumericalError):
    def __init__(self, message, candidates=()):
        super().__init__(message)
        self.candidates = tuple(candidates)


class IntegrationError(NumericalError):
    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class PositivityError(NumericalError):
    pass


class CalibrationError(NumericalError):
    def __init__(self, message, sweep=None):
        super().__init__(message)
        self.sweep = sweep or {}
