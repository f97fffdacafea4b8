"""Exception hierarchy shared by the library and the command line."""


class OnflowError(Exception):
    """Base class for every error raised by this package."""


class InvalidArgumentError(OnflowError, ValueError):
    pass


class DataError(OnflowError):
    """Problems with an input data file. The CLI maps these to exit code 2."""


class MissingFileError(DataError, FileNotFoundError):
    pass


class MalformedRowError(DataError, ValueError):
    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column


class UnknownAssetError(DataError, KeyError):
    def __init__(self, name, available):
        super().__init__(name)
        self.name = name
        self.available = list(available)

    def __str__(self):
        return f"unknown asset {self.name!r}; available: {', '.join(self.available)}"


class DegenerateDataError(DataError, ValueError):
    pass


class UnsupportedDimensionError(OnflowError, ValueError):
    pass


class NumericalError(OnflowError, ArithmeticError):
    pass


class DivergenceError(NumericalError):
    """Logits left the admissible range during integration."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step
