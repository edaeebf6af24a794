"""Exception types raised across the toolkit."""


class ImplangError(Exception):
    pass


class AlignmentError(ImplangError):
    pass


class ConfigurationError(ImplangError):
    pass


class ArgumentError(ImplangError, ValueError):
    pass


class TrainingError(ImplangError):
    pass


class UndefinedMetricError(ImplangError, ArithmeticError):
    pass


class TreeParseError(ImplangError, ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class DataError(ImplangError):
    pass


class UnsupportedRecoveryError(ImplangError):
    pass


class StatisticsError(ImplangError, ArithmeticError):
    pass


class ClassificationError(ImplangError):
    pass


class FormatError(ImplangError, ValueError):
    """Malformed line in one of the plain-text interchange files."""

    def __init__(self, message: str, path=None, lineno: int | None = None):
        where = ""
        if path is not None:
            where += f"{path}"
        if lineno is not None:
            where += f":{lineno}"
        super().__init__(f"{where}: {message}" if where else message)
        self.path = path
        self.lineno = lineno
