"""Source spans, diagnostics and the exceptions that carry them."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

ERROR = "error"
WARNING = "warning"


@dataclass(frozen=True)
class SourceSpan:
    file: str
    line: int
    column: int
    length: int = 0

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.column}"


@dataclass(frozen=True)
class Diagnostic:
    severity: str
    message: str
    span: Optional[SourceSpan]
    rule_id: str

    @property
    def is_error(self) -> bool:
        return self.severity == ERROR

    def format(self, default_file: str = "<input>") -> str:
        where = str(self.span) if self.span is not None else f"{default_file}:0:0"
        return f"{where}: {self.severity}[{self.rule_id}]: {self.message}"

    def __str__(self) -> str:
        return self.format()


def error(rule_id: str, message: str, span: Optional[SourceSpan] = None) -> Diagnostic:
    return Diagnostic(ERROR, message, span, rule_id)


def warning(rule_id: str, message: str, span: Optional[SourceSpan] = None) -> Diagnostic:
    return Diagnostic(WARNING, message, span, rule_id)


def has_errors(diags: Iterable[Diagnostic]) -> bool:
    return any(d.is_error for d in diags)


class IrglError(Exception):
    """Base class for all errors raised by this package."""


class DiagnosticError(IrglError):
    """Raised with one or more diagnostics attached."""

    def __init__(self, diagnostics: Iterable[Diagnostic]):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(d.format() for d in self.diagnostics))


class ParseError(DiagnosticError):
    pass
