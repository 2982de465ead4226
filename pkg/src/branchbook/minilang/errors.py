"""Error values produced by the mini-language toolchain.

Errors are data: the evaluator never lets one escape as a raw exception.
`MiniLangError` is the internal control-flow wrapper; public entry points
catch it and hand back the `EvalError` payload.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum


class ErrorKind(str, Enum):
    LEX_ERROR = "LexError"
    PARSE_ERROR = "ParseError"
    UNDEFINED_VARIABLE = "UndefinedVariable"
    TYPE_MISMATCH = "TypeMismatch"
    DIVISION_BY_ZERO = "DivisionByZero"
    INDEX_OUT_OF_RANGE = "IndexOutOfRange"
    ARITY_ERROR = "ArityError"
    USER_ERROR = "UserError"


@dataclass(frozen=True)
class Span:
    """1-based source position of the token or node that failed."""

    line: int
    col: int


@dataclass(frozen=True)
class EvalError:
    kind: ErrorKind
    message: str
    span: Span

    def __str__(self) -> str:
        return f"{self.kind.value}: {self.message} (line {self.span.line}, col {self.span.col})"

    def to_json(self) -> dict:
        return {
            "kind": self.kind.value,
            "message": self.message,
            "line": self.span.line,
            "col": self.span.col,
        }

    @staticmethod
    def from_json(doc: dict) -> "EvalError":
        return EvalError(
            kind=ErrorKind(doc["kind"]),
            message=doc["message"],
            span=Span(doc["line"], doc["col"]),
        )


class MiniLangError(Exception):
    """Raised internally to unwind; carries the user-facing error value."""

    def __init__(self, error: EvalError):
        super().__init__(str(error))
        self.error = error


def fail(kind: ErrorKind, message: str, span: Span) -> "MiniLangError":
    return MiniLangError(EvalError(kind, message, span))
