"""Deterministic embedded language: lexer, parser, evaluator."""
from .errors import ErrorKind, EvalError, MiniLangError, Span
from .interp import (
    Environment,
    env_eq,
    eval_cell,
    fork,
    lcg_values,
    render,
    run_source,
    value_eq,
)
from .parser import Program, parse

__all__ = [
    "ErrorKind",
    "EvalError",
    "MiniLangError",
    "Span",
    "Environment",
    "env_eq",
    "eval_cell",
    "fork",
    "lcg_values",
    "render",
    "run_source",
    "value_eq",
    "Program",
    "parse",
]
