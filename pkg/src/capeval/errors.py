"""Shared exception types and their CLI exit-code mapping."""


class CapevalError(Exception):
    """Base class for all package-specific errors."""


class ConfigurationError(CapevalError):
    """A run was requested with missing or inconsistent resources/flags.

    Mapped to exit code 1 by the CLI.
    """


class DataFormatError(CapevalError):
    """An input file violates its declared schema.

    Mapped to exit code 2 by the CLI. ``path``/``line``/``offset`` locate
    the problem when known.
    """

    def __init__(self, message, *, path=None, line=None, offset=None):
        self.path = path
        self.line = line
        self.offset = offset
        where = []
        if path is not None:
            where.append(str(path))
        if line is not None:
            where.append(f"line {line}")
        if offset is not None:
            where.append(f"byte {offset}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)
