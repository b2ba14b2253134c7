class SensimapError(Exception):
    """Base class for every error raised by the package."""

    exit_code = 1


class ConfigError(SensimapError):
    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        if path is not None and line is not None:
            message = f"{path}:{line}: {message}"
        elif path is not None:
            message = f"{path}: {message}"
        super().__init__(message)


class InvalidDesignError(SensimapError, ValueError):
    pass


class DimensionMismatchError(SensimapError, ValueError):
    pass


class DataFormatError(SensimapError, ValueError):
    pass


class NumericalError(SensimapError, ArithmeticError):
    exit_code = 2

    def annotate(self, **coords):
        """Attach loop coordinates (index set, trajectory, replicate) to the message."""
        where = ", ".join(f"{key}={value}" for key, value in coords.items())
        self.args = (f"{self.args[0] if self.args else ''} [{where}]",)
        return self


class DegenerateDataError(NumericalError):
    pass


class DegenerateVarianceError(NumericalError):
    pass


class IllConditionedKernelError(NumericalError):
    pass


class UndefinedQ2Error(NumericalError):
    pass


class EmptySummaryError(NumericalError):
    pass
