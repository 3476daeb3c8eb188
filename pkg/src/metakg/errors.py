class MetakgError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(MetakgError):
    """Input violated a documented constraint (bad IRI, bad manifest, ...)."""


class ParseError(MetakgError):
    """Syntax error in a parsed file, with 1-based line/column position."""

    def __init__(self, message, line, column=None):
        pos = f"line {line}" if column is None else f"line {line}, col {column}"
        super().__init__(f"{pos}: {message}")
        self.line = line
        self.column = column


class MappingError(MetakgError):
    """Mapping document refers to something that does not exist."""


class TranslationError(MetakgError):
    """Translation backend failed or was asked to translate nothing."""
