"""Exception hierarchy; each class carries the CLI exit code it maps to."""


class CRError(Exception):
    exit_code = 1


class UsageError(CRError, ValueError):
    exit_code = 2


class ParseError(UsageError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None,
                 snippet: str | None = None):
        self.line, self.column, self.snippet = line, column, snippet
        where = f"line {line}, column {column}: " if line is not None else ""
        text = f"{where}{message}"
        if snippet is not None and column is not None:
            text += f"\n  {snippet}\n  {' ' * (column - 1)}^"
        super().__init__(text)
        self.message = message


class ValidationError(CRError, ValueError):
    exit_code = 3


class NormalizationError(ValidationError):
    pass


class CapExceeded(CRError):
    exit_code = 4
