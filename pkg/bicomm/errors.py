from __future__ import annotations


class BicommError(Exception):
    """Base class for every error raised by the library."""


class MalformedInputError(BicommError, ValueError):
    pass


class DslSyntaxError(MalformedInputError):
    def __init__(self, message: str, *, line: int | None = None, column: int | None = None) -> None:
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(f"{where}{message}")


class UnknownSymbolError(MalformedInputError):
    pass


class NonReducibleError(BicommError, ArithmeticError):
    pass


class DimensionMismatchError(BicommError, ValueError):
    pass


class ContainmentError(BicommError, ValueError):
    pass


class SingularMatrixError(BicommError, ValueError):
    pass


class MustInstantiateError(BicommError, ValueError):
    pass


class InvalidSpecError(BicommError, ValueError):
    pass


class StabilityError(BicommError, ValueError):
    pass


class WorkLimitError(BicommError, RuntimeError):
    def __init__(self, message: str, *, estimate: int) -> None:
        self.estimate = estimate
        super().__init__(message)


class ExcludedValueError(BicommError, ValueError):
    pass


class CatalogError(BicommError, RuntimeError):
    def __init__(self, entry: str, message: str) -> None:
        self.entry = entry
        super().__init__(f"{entry}: {message}")


class ConfigError(BicommError, ValueError):
    pass


class IrrationalValueError(BicommError, ValueError):
    pass
