"""Recursive-descent parser for the cell mini-language.

Precedence, loosest to tightest:

    or > and > not > comparisons (non-associative) > + - > * / % >
    unary - > ** (right-assoc) > call / index > atoms

Statements are separated by newlines or ';'.
"""
from __future__ import annotations

from dataclasses import dataclass

from .errors import ErrorKind, Span, fail
from .lexer import Token, tokenize

COMPARISON_OPS = ("==", "!=", "<", "<=", ">", ">=")


@dataclass(frozen=True)
class Expr:
    span: Span


@dataclass(frozen=True)
class IntLit(Expr):
    value: int


@dataclass(frozen=True)
class FloatLit(Expr):
    value: float


@dataclass(frozen=True)
class StrLit(Expr):
    value: str


@dataclass(frozen=True)
class BoolLit(Expr):
    value: bool


@dataclass(frozen=True)
class NullLit(Expr):
    pass


@dataclass(frozen=True)
class Name(Expr):
    ident: str


@dataclass(frozen=True)
class ListLit(Expr):
    items: tuple[Expr, ...]


@dataclass(frozen=True)
class Unary(Expr):
    op: str
    operand: Expr


@dataclass(frozen=True)
class Binary(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Call(Expr):
    func: str
    args: tuple[Expr, ...]


@dataclass(frozen=True)
class Index(Expr):
    target: Expr
    index: Expr


@dataclass(frozen=True)
class Stmt:
    span: Span


@dataclass(frozen=True)
class Assign(Stmt):
    name: str
    expr: Expr


@dataclass(frozen=True)
class ExprStmt(Stmt):
    expr: Expr


@dataclass(frozen=True)
class Program:
    stmts: tuple[Stmt, ...]


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def next(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def at_op(self, *ops: str) -> bool:
        tok = self.peek()
        return tok.kind == "OP" and tok.text in ops

    def at_keyword(self, word: str) -> bool:
        tok = self.peek()
        return tok.kind == "KEYWORD" and tok.text == word

    def expect_op(self, op: str) -> Token:
        if not self.at_op(op):
            raise self.unexpected(f"expected '{op}'")
        return self.next()

    def unexpected(self, what: str):
        tok = self.peek()
        shown = "end of input" if tok.kind == "EOF" else repr(tok.text)
        return fail(ErrorKind.PARSE_ERROR, f"{what}, got {shown}", tok.span)

    def skip_separators(self) -> None:
        while self.peek().kind == "NEWLINE" or self.at_op(";"):
            self.next()

    def program(self) -> Program:
        stmts: list[Stmt] = []
        self.skip_separators()
        while self.peek().kind != "EOF":
            stmts.append(self.statement())
            tok = self.peek()
            if tok.kind == "EOF":
                break
            if tok.kind == "NEWLINE" or self.at_op(";"):
                self.skip_separators()
            else:
                raise self.unexpected("expected end of statement")
        return Program(tuple(stmts))

    def statement(self) -> Stmt:
        tok = self.peek()
        if tok.kind == "IDENT":
            after = self.tokens[self.pos + 1]
            if after.kind == "OP" and after.text == "=":
                self.next()
                self.next()
                expr = self.expression()
                return Assign(tok.span, tok.text, expr)
        expr = self.expression()
        return ExprStmt(expr.span, expr)

    def expression(self) -> Expr:
        return self.or_expr()

    def or_expr(self) -> Expr:
        left = self.and_expr()
        while self.at_keyword("or"):
            op = self.next()
            right = self.and_expr()
            left = Binary(op.span, "or", left, right)
        return left

    def and_expr(self) -> Expr:
        left = self.not_expr()
        while self.at_keyword("and"):
            op = self.next()
            right = self.not_expr()
            left = Binary(op.span, "and", left, right)
        return left

    def not_expr(self) -> Expr:
        if self.at_keyword("not"):
            op = self.next()
            operand = self.not_expr()
            return Unary(op.span, "not", operand)
        return self.comparison()

    def comparison(self) -> Expr:
        left = self.add_expr()
        if self.at_op(*COMPARISON_OPS):
            op = self.next()
            right = self.add_expr()
            if self.at_op(*COMPARISON_OPS):
                raise self.unexpected("comparisons cannot be chained")
            return Binary(op.span, op.text, left, right)
        return left

    def add_expr(self) -> Expr:
        left = self.mul_expr()
        while self.at_op("+", "-"):
            op = self.next()
            right = self.mul_expr()
            left = Binary(op.span, op.text, left, right)
        return left

    def mul_expr(self) -> Expr:
        left = self.unary()
        while self.at_op("*", "/", "%"):
            op = self.next()
            right = self.unary()
            left = Binary(op.span, op.text, left, right)
        return left

    def unary(self) -> Expr:
        if self.at_op("-"):
            op = self.next()
            operand = self.unary()
            return Unary(op.span, "-", operand)
        return self.power()

    def power(self) -> Expr:
        base = self.postfix()
        if self.at_op("**"):
            op = self.next()
            exponent = self.unary()  # right-assoc, admits 2 ** -3
            return Binary(op.span, "**", base, exponent)
        return base

    def postfix(self) -> Expr:
        # call position requires a bare identifier token, not (expr)
        was_bare_ident = self.peek().kind == "IDENT"
        expr = self.atom()
        if was_bare_ident and isinstance(expr, Name) and self.at_op("("):
            self.next()
            args: list[Expr] = []
            if not self.at_op(")"):
                args.append(self.expression())
                while self.at_op(","):
                    self.next()
                    args.append(self.expression())
            self.expect_op(")")
            expr = Call(expr.span, expr.ident, tuple(args))
        while self.at_op("["):
            bracket = self.next()
            index = self.expression()
            self.expect_op("]")
            expr = Index(bracket.span, expr, index)
        return expr

    def atom(self) -> Expr:
        tok = self.peek()
        if tok.kind == "INT":
            self.next()
            return IntLit(tok.span, tok.value)
        if tok.kind == "FLOAT":
            self.next()
            return FloatLit(tok.span, tok.value)
        if tok.kind == "STRING":
            self.next()
            return StrLit(tok.span, tok.value)
        if tok.kind == "KEYWORD" and tok.text in ("true", "false"):
            self.next()
            return BoolLit(tok.span, tok.text == "true")
        if tok.kind == "KEYWORD" and tok.text == "null":
            self.next()
            return NullLit(tok.span)
        if tok.kind == "IDENT":
            self.next()
            return Name(tok.span, tok.text)
        if self.at_op("("):
            self.next()
            expr = self.expression()
            self.expect_op(")")
            return expr
        if self.at_op("["):
            start = self.next()
            items: list[Expr] = []
            if not self.at_op("]"):
                items.append(self.expression())
                while self.at_op(","):
                    self.next()
                    items.append(self.expression())
            self.expect_op("]")
            return ListLit(start.span, tuple(items))
        raise self.unexpected("expected an expression")


def parse(source: str) -> Program:
    """Parse a cell; raises MiniLangError carrying LexError/ParseError."""
    tokens = tokenize(source)
    return _Parser(tokens).program()
