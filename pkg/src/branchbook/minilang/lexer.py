"""Tokenizer for the cell mini-language."""
from __future__ import annotations

from dataclasses import dataclass

from .errors import ErrorKind, Span, fail

KEYWORDS = {"true", "false", "null", "or", "and", "not"}

# longest-match first
SYMBOLS = ["**", "==", "!=", "<=", ">=", "<", ">", "+", "-", "*", "/", "%",
           "=", "(", ")", "[", "]", ",", ";"]

INT_MAX = 2**63 - 1


@dataclass(frozen=True)
class Token:
    kind: str  # INT FLOAT STRING IDENT KEYWORD OP NEWLINE EOF
    text: str
    span: Span
    value: object = None


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    line, col = 1, 1
    i, n = 0, len(source)

    def span() -> Span:
        return Span(line, col)

    def advance(k: int = 1) -> None:
        nonlocal i, line, col
        for _ in range(k):
            if i < n and source[i] == "\n":
                line += 1
                col = 1
            else:
                col += 1
            i += 1

    while i < n:
        ch = source[i]
        if ch == "\n":
            tokens.append(Token("NEWLINE", "\n", span()))
            advance()
            continue
        if ch in " \t\r":
            advance()
            continue
        if ch == "#":
            while i < n and source[i] != "\n":
                advance()
            continue
        if ch == '"':
            start = span()
            advance()
            buf = []
            while True:
                if i >= n or source[i] == "\n":
                    raise fail(ErrorKind.LEX_ERROR, "unterminated text literal", start)
                c = source[i]
                if c == '"':
                    advance()
                    break
                if c == "\\":
                    if i + 1 >= n:
                        raise fail(ErrorKind.LEX_ERROR, "unterminated text literal", start)
                    esc = source[i + 1]
                    if esc == '"':
                        buf.append('"')
                    elif esc == "\\":
                        buf.append("\\")
                    elif esc == "n":
                        buf.append("\n")
                    else:
                        raise fail(ErrorKind.LEX_ERROR, f"invalid escape '\\{esc}'", span())
                    advance(2)
                    continue
                buf.append(c)
                advance()
            tokens.append(Token("STRING", "".join(buf), start, "".join(buf)))
            continue
        if ch.isdigit():
            start = span()
            j = i
            while j < n and source[j].isdigit():
                j += 1
            if j < n and source[j] == "." and j + 1 < n and source[j + 1].isdigit():
                j += 1
                while j < n and source[j].isdigit():
                    j += 1
                text = source[i:j]
                advance(j - i)
                tokens.append(Token("FLOAT", text, start, float(text)))
            else:
                text = source[i:j]
                advance(j - i)
                iv = int(text)
                if iv > INT_MAX:
                    raise fail(ErrorKind.LEX_ERROR, "integer literal out of range", start)
                tokens.append(Token("INT", text, start, iv))
            continue
        if ch.isalpha() or ch == "_":
            start = span()
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            text = source[i:j]
            advance(j - i)
            kind = "KEYWORD" if text in KEYWORDS else "IDENT"
            tokens.append(Token(kind, text, start))
            continue
        for sym in SYMBOLS:
            if source.startswith(sym, i):
                start = span()
                advance(len(sym))
                tokens.append(Token("OP", sym, start))
                break
        else:
            raise fail(ErrorKind.LEX_ERROR, f"unexpected character {ch!r}", span())

    tokens.append(Token("EOF", "", Span(line, col)))
    return tokens
