"""Evaluator for the cell mini-language.

Values are represented with host types: None, bool, int (wrapped to 64-bit
two's complement), float, str, and tuple for lists. Lists are immutable;
builtins that "modify" return new lists. Type checks use exact types
throughout because bool is an int subclass in the host language.
"""
from __future__ import annotations

import math
from typing import Any, Callable, Optional

from .errors import ErrorKind, EvalError, MiniLangError, Span, fail
from .parser import (
    Assign,
    Binary,
    BoolLit,
    Call,
    Expr,
    ExprStmt,
    FloatLit,
    Index,
    IntLit,
    ListLit,
    Name,
    NullLit,
    Program,
    StrLit,
    Unary,
    parse,
)

Value = Any  # None | bool | int | float | str | tuple[Value, ...]

INT_BITS = 64
INT_MOD = 1 << INT_BITS
INT_MIN = -(1 << (INT_BITS - 1))
INT_MAX = (1 << (INT_BITS - 1)) - 1

# rand() generator constants; values must never change once published.
LCG_MUL = 6364136223846793005
LCG_INC = 1442695040888963407

MAX_LIST_LEN = 1_000_000


class Environment:
    """Mutable name→value store; fork() gives an isolated copy."""

    __slots__ = ("bindings",)

    def __init__(self, bindings: Optional[dict[str, Value]] = None):
        self.bindings: dict[str, Value] = dict(bindings) if bindings else {}

    def get(self, name: str) -> Value:
        return self.bindings[name]

    def has(self, name: str) -> bool:
        return name in self.bindings

    def set(self, name: str, value: Value) -> None:
        self.bindings[name] = value

    def fork(self) -> "Environment":
        # values are immutable, so a shallow copy is a full isolation
        return Environment(self.bindings)

    def __repr__(self) -> str:
        return f"Environment({self.bindings!r})"


def fork(env: Environment) -> Environment:
    return env.fork()


def env_eq(a: Environment, b: Environment) -> bool:
    if a.bindings.keys() != b.bindings.keys():
        return False
    return all(value_eq(v, b.bindings[k]) for k, v in a.bindings.items())


def _is_int(v: Value) -> bool:
    return type(v) is int


def _is_float(v: Value) -> bool:
    return type(v) is float


def _is_number(v: Value) -> bool:
    return type(v) is int or type(v) is float


def value_eq(a: Value, b: Value) -> bool:
    """Structural equality with exact types: Int 2 != Float 2.0, true != 1."""
    if type(a) is not type(b):
        return False
    if type(a) is tuple:
        return len(a) == len(b) and all(value_eq(x, y) for x, y in zip(a, b))
    if type(a) is float:
        return a == b or (math.isnan(a) and math.isnan(b))
    return a == b


def type_name(v: Value) -> str:
    if v is None:
        return "Null"
    if type(v) is bool:
        return "Bool"
    if type(v) is int:
        return "Int"
    if type(v) is float:
        return "Float"
    if type(v) is str:
        return "Text"
    if type(v) is tuple:
        return "List"
    raise TypeError(f"not a language value: {v!r}")


def _wrap(n: int) -> int:
    """Reduce an unbounded host int to 64-bit two's complement."""
    return ((n + (1 << 63)) % INT_MOD) - (1 << 63)


def _fmt_float(f: float) -> str:
    if math.isnan(f):
        return "nan"
    if math.isinf(f):
        return "inf" if f > 0 else "-inf"
    s = repr(f)
    if "." not in s and "e" not in s and "E" not in s:
        s += ".0"
    return s


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") + '"'


def render(v: Value) -> str:
    """Canonical display text; top-level Text is verbatim (unquoted)."""
    if type(v) is str:
        return v
    return _render_nested(v)


def _render_nested(v: Value) -> str:
    if v is None:
        return "null"
    if type(v) is bool:
        return "true" if v else "false"
    if type(v) is int:
        return str(v)
    if type(v) is float:
        return _fmt_float(v)
    if type(v) is str:
        return _quote(v)
    if type(v) is tuple:
        return "[" + ", ".join(_render_nested(x) for x in v) + "]"
    raise TypeError(f"not a language value: {v!r}")


class _Ctx:
    """Per-cell evaluation sink for display output."""

    __slots__ = ("outputs",)

    def __init__(self) -> None:
        self.outputs: list[str] = []


def _trunc_div(a: int, b: int) -> int:
    q = abs(a) // abs(b)
    if (a < 0) != (b < 0):
        q = -q
    return q


def _trunc_mod(a: int, b: int) -> int:
    return a - _trunc_div(a, b) * b  # sign follows the dividend


def _arith_error_span(span: Span, kind: ErrorKind, msg: str) -> MiniLangError:
    return fail(kind, msg, span)


def _binary_numeric(op: str, a: Value, b: Value, span: Span) -> Value:
    both_int = _is_int(a) and _is_int(b)
    if op == "+":
        if both_int:
            return _wrap(a + b)
        return float(a) + float(b)
    if op == "-":
        if both_int:
            return _wrap(a - b)
        return float(a) - float(b)
    if op == "*":
        if both_int:
            return _wrap(a * b)
        return float(a) * float(b)
    if op == "/":
        if both_int:
            if b == 0:
                raise fail(ErrorKind.DIVISION_BY_ZERO, "division by zero", span)
            return _wrap(_trunc_div(a, b))
        fb = float(b)
        if fb == 0.0:
            raise fail(ErrorKind.DIVISION_BY_ZERO, "division by zero", span)
        return float(a) / fb
    if op == "%":
        if both_int:
            if b == 0:
                raise fail(ErrorKind.DIVISION_BY_ZERO, "modulo by zero", span)
            return _wrap(_trunc_mod(a, b))
        fb = float(b)
        if fb == 0.0:
            raise fail(ErrorKind.DIVISION_BY_ZERO, "modulo by zero", span)
        return math.fmod(float(a), fb)
    raise AssertionError(op)


def _power(a: Value, b: Value, span: Span) -> Value:
    if _is_int(a) and _is_int(b):
        if b >= 0:
            # modular pow keeps huge exponents cheap under wrapping
            return _wrap(pow(a % INT_MOD, b, INT_MOD))
        if a == 0:
            raise fail(ErrorKind.DIVISION_BY_ZERO, "zero to a negative power", span)
        return float(a) ** float(b)
    fa, fb = float(a), float(b)
    if fa == 0.0 and fb < 0:
        raise fail(ErrorKind.DIVISION_BY_ZERO, "zero to a negative power", span)
    if fa < 0 and not fb.is_integer():
        raise fail(
            ErrorKind.TYPE_MISMATCH, "fractional power of a negative number", span
        )
    try:
        return fa**fb
    except OverflowError:
        raise fail(ErrorKind.TYPE_MISMATCH, "numeric overflow in **", span) from None


def _compare_order(op: str, a: Value, b: Value, span: Span) -> bool:
    if _is_number(a) and _is_number(b):
        la: Any = a
        lb: Any = b
        if _is_float(a) or _is_float(b):
            la, lb = float(a), float(b)
    elif type(a) is str and type(b) is str:
        la, lb = a, b
    else:
        raise fail(
            ErrorKind.TYPE_MISMATCH,
            f"cannot order {type_name(a)} and {type_name(b)}",
            span,
        )
    if op == "<":
        return la < lb
    if op == "<=":
        return la <= lb
    if op == ">":
        return la > lb
    if op == ">=":
        return la >= lb
    raise AssertionError(op)


# ---------------------------------------------------------------------------
# builtins


def _need_arity(name: str, args: tuple, want: int, span: Span) -> None:
    if len(args) != want:
        plural = "s" if want != 1 else ""
        raise fail(
            ErrorKind.ARITY_ERROR,
            f"{name} expects {want} argument{plural}, got {len(args)}",
            span,
        )


def _need_number_list(name: str, v: Value, span: Span) -> tuple:
    if type(v) is not tuple:
        raise fail(ErrorKind.TYPE_MISMATCH, f"{name} expects a list of numbers", span)
    for item in v:
        if not _is_number(item):
            raise fail(
                ErrorKind.TYPE_MISMATCH, f"{name} expects a list of numbers", span
            )
    return v


def _bi_len(ctx: _Ctx, args: tuple, span: Span) -> Value:
    _need_arity("len", args, 1, span)
    v = args[0]
    if type(v) is tuple or type(v) is str:
        return len(v)
    raise fail(ErrorKind.TYPE_MISMATCH, "len expects a list or text", span)


def _bi_sum(ctx: _Ctx, args: tuple, span: Span) -> Value:
    _need_arity("sum", args, 1, span)
    items = _need_number_list("sum", args[0], span)
    if all(_is_int(x) for x in items):
        total = 0
        for x in items:
            total = _wrap(total + x)
        return total
    return math.fsum(float(x) for x in items)


def _bi_min(ctx: _Ctx, args: tuple, span: Span) -> Value:
    _need_arity("min", args, 1, span)
    items = _need_number_list("min", args[0], span)
    if not items:
        raise fail(ErrorKind.TYPE_MISMATCH, "empty list", span)
    best = items[0]
    for x in items[1:]:
        if float(x) < float(best):
            best = x
    return best


def _bi_max(ctx: _Ctx, args: tuple, span: Span) -> Value:
    _need_arity("max", args, 1, span)
    items = _need_number_list("max", args[0], span)
    if not items:
        raise fail(ErrorKind.TYPE_MISMATCH, "empty list", span)
    best = items[0]
    for x in items[1:]:
        if float(x) > float(best):
            best = x
    return best


def _bi_mean(ctx: _Ctx, args: tuple, span: Span) -> Value:
    _need_arity("mean", args, 1, span)
    items = _need_number_list("mean", args[0], span)
    if not items:
        raise fail(ErrorKind.TYPE_MISMATCH, "empty list", span)
    return math.fsum(float(x) for x in items) / len(items)


def _bi_abs(ctx: _Ctx, args: tuple, span: Span) -> Value:
    _need_arity("abs", args, 1, span)
    v = args[0]
    if _is_int(v):
        return _wrap(-v) if v < 0 else v
    if _is_float(v):
        return abs(v)
    raise fail(ErrorKind.TYPE_MISMATCH, "abs expects a number", span)


def _bi_round(ctx: _Ctx, args: tuple, span: Span) -> Value:
    _need_arity("round", args, 1, span)
    v = args[0]
    if not _is_float(v):
        raise fail(ErrorKind.TYPE_MISMATCH, "round expects a float", span)
    if math.isnan(v) or math.isinf(v):
        raise fail(ErrorKind.TYPE_MISMATCH, "round of non-finite float", span)
    # half away from zero
    out = math.floor(v + 0.5) if v >= 0 else math.ceil(v - 0.5)
    return _wrap(out)


def _bi_range(ctx: _Ctx, args: tuple, span: Span) -> Value:
    if len(args) not in (1, 2):
        raise fail(
            ErrorKind.ARITY_ERROR,
            f"range expects 1 or 2 arguments, got {len(args)}",
            span,
        )
    for a in args:
        if not _is_int(a):
            raise fail(ErrorKind.TYPE_MISMATCH, "range expects integers", span)
    lo, hi = (0, args[0]) if len(args) == 1 else (args[0], args[1])
    count = hi - lo
    if count <= 0:
        return ()
    if count > MAX_LIST_LEN:
        raise fail(ErrorKind.TYPE_MISMATCH, "range result too large", span)
    return tuple(range(lo, hi))


def _bi_append(ctx: _Ctx, args: tuple, span: Span) -> Value:
    _need_arity("append", args, 2, span)
    if type(args[0]) is not tuple:
        raise fail(ErrorKind.TYPE_MISMATCH, "append expects a list", span)
    return args[0] + (args[1],)


def _bi_concat(ctx: _Ctx, args: tuple, span: Span) -> Value:
    _need_arity("concat", args, 2, span)
    if type(args[0]) is not tuple or type(args[1]) is not tuple:
        raise fail(ErrorKind.TYPE_MISMATCH, "concat expects two lists", span)
    return args[0] + args[1]


def _bi_sort(ctx: _Ctx, args: tuple, span: Span) -> Value:
    _need_arity("sort", args, 1, span)
    v = args[0]
    if type(v) is not tuple:
        raise fail(ErrorKind.TYPE_MISMATCH, "sort expects a list", span)
    if all(_is_number(x) for x in v):
        return tuple(sorted(v, key=float))
    if all(type(x) is str for x in v):
        return tuple(sorted(v))
    raise fail(
        ErrorKind.TYPE_MISMATCH, "sort expects a list of numbers or of texts", span
    )


def _bi_show(ctx: _Ctx, args: tuple, span: Span) -> Value:
    _need_arity("show", args, 1, span)
    ctx.outputs.append(render(args[0]))
    return args[0]


def _bi_str(ctx: _Ctx, args: tuple, span: Span) -> Value:
    _need_arity("str", args, 1, span)
    return render(args[0])


def _bi_error(ctx: _Ctx, args: tuple, span: Span) -> Value:
    _need_arity("error", args, 1, span)
    if type(args[0]) is not str:
        raise fail(ErrorKind.TYPE_MISMATCH, "error expects a text message", span)
    raise fail(ErrorKind.USER_ERROR, args[0], span)


def lcg_values(seed: int, n: int) -> list[float]:
    """The fixed generator behind rand(); also used directly by tests."""
    state = seed % INT_MOD
    out: list[float] = []
    for _ in range(n):
        state = (LCG_MUL * state + LCG_INC) % INT_MOD
        out.append((state >> 11) / (1 << 53))
    return out


def _bi_rand(ctx: _Ctx, args: tuple, span: Span) -> Value:
    _need_arity("rand", args, 2, span)
    seed, n = args
    if not _is_int(seed) or not _is_int(n):
        raise fail(ErrorKind.TYPE_MISMATCH, "rand expects integer seed and count", span)
    if n < 0:
        raise fail(ErrorKind.TYPE_MISMATCH, "rand count must be non-negative", span)
    if n > MAX_LIST_LEN:
        raise fail(ErrorKind.TYPE_MISMATCH, "rand result too large", span)
    return tuple(lcg_values(seed, n))


BUILTINS: dict[str, Callable[[_Ctx, tuple, Span], Value]] = {
    "len": _bi_len,
    "sum": _bi_sum,
    "min": _bi_min,
    "max": _bi_max,
    "mean": _bi_mean,
    "abs": _bi_abs,
    "round": _bi_round,
    "range": _bi_range,
    "append": _bi_append,
    "concat": _bi_concat,
    "sort": _bi_sort,
    "show": _bi_show,
    "str": _bi_str,
    "error": _bi_error,
    "rand": _bi_rand,
}


# ---------------------------------------------------------------------------
# expression / statement evaluation


def _eval_expr(expr: Expr, env: Environment, ctx: _Ctx) -> Value:
    if isinstance(expr, IntLit):
        return expr.value
    if isinstance(expr, FloatLit):
        return expr.value
    if isinstance(expr, StrLit):
        return expr.value
    if isinstance(expr, BoolLit):
        return expr.value
    if isinstance(expr, NullLit):
        return None
    if isinstance(expr, Name):
        if not env.has(expr.ident):
            raise fail(
                ErrorKind.UNDEFINED_VARIABLE,
                f"undefined variable '{expr.ident}'",
                expr.span,
            )
        return env.get(expr.ident)
    if isinstance(expr, ListLit):
        return tuple(_eval_expr(item, env, ctx) for item in expr.items)
    if isinstance(expr, Unary):
        return _eval_unary(expr, env, ctx)
    if isinstance(expr, Binary):
        return _eval_binary(expr, env, ctx)
    if isinstance(expr, Call):
        fn = BUILTINS.get(expr.func)
        if fn is None:
            raise fail(
                ErrorKind.UNDEFINED_VARIABLE,
                f"unknown function '{expr.func}'",
                expr.span,
            )
        args = tuple(_eval_expr(a, env, ctx) for a in expr.args)
        return fn(ctx, args, expr.span)
    if isinstance(expr, Index):
        return _eval_index(expr, env, ctx)
    raise AssertionError(f"unhandled expr {expr!r}")


def _eval_unary(expr: Unary, env: Environment, ctx: _Ctx) -> Value:
    v = _eval_expr(expr.operand, env, ctx)
    if expr.op == "-":
        if _is_int(v):
            return _wrap(-v)
        if _is_float(v):
            return -v
        raise fail(
            ErrorKind.TYPE_MISMATCH, f"cannot negate {type_name(v)}", expr.span
        )
    if expr.op == "not":
        if type(v) is bool:
            return not v
        raise fail(
            ErrorKind.TYPE_MISMATCH, f"'not' expects Bool, got {type_name(v)}",
            expr.span,
        )
    raise AssertionError(expr.op)


def _eval_binary(expr: Binary, env: Environment, ctx: _Ctx) -> Value:
    op = expr.op
    if op in ("or", "and"):
        left = _eval_expr(expr.left, env, ctx)
        if type(left) is not bool:
            raise fail(
                ErrorKind.TYPE_MISMATCH,
                f"'{op}' expects Bool, got {type_name(left)}",
                expr.span,
            )
        if op == "or" and left:
            return True
        if op == "and" and not left:
            return False
        right = _eval_expr(expr.right, env, ctx)
        if type(right) is not bool:
            raise fail(
                ErrorKind.TYPE_MISMATCH,
                f"'{op}' expects Bool, got {type_name(right)}",
                expr.span,
            )
        return right

    left = _eval_expr(expr.left, env, ctx)
    right = _eval_expr(expr.right, env, ctx)

    if op == "==":
        return value_eq(left, right)
    if op == "!=":
        return not value_eq(left, right)
    if op in ("<", "<=", ">", ">="):
        return _compare_order(op, left, right, expr.span)
    if op == "**":
        if not (_is_number(left) and _is_number(right)):
            raise fail(
                ErrorKind.TYPE_MISMATCH,
                f"cannot apply ** to {type_name(left)} and {type_name(right)}",
                expr.span,
            )
        return _power(left, right, expr.span)
    if op == "+" and type(left) is str and type(right) is str:
        return left + right
    if op in ("+", "-", "*", "/", "%"):
        if not (_is_number(left) and _is_number(right)):
            raise fail(
                ErrorKind.TYPE_MISMATCH,
                f"cannot apply {op} to {type_name(left)} and {type_name(right)}",
                expr.span,
            )
        return _binary_numeric(op, left, right, expr.span)
    raise AssertionError(op)


def _eval_index(expr: Index, env: Environment, ctx: _Ctx) -> Value:
    target = _eval_expr(expr.target, env, ctx)
    idx = _eval_expr(expr.index, env, ctx)
    if type(target) is not tuple and type(target) is not str:
        raise fail(
            ErrorKind.TYPE_MISMATCH,
            f"cannot index {type_name(target)}",
            expr.span,
        )
    if not _is_int(idx):
        raise fail(
            ErrorKind.TYPE_MISMATCH,
            f"index must be Int, got {type_name(idx)}",
            expr.span,
        )
    if idx < 0 or idx >= len(target):
        raise fail(
            ErrorKind.INDEX_OUT_OF_RANGE,
            f"index {idx} out of range for length {len(target)}",
            expr.span,
        )
    return target[idx]


def eval_cell(prog: Program, env: Environment) -> tuple[Environment, list[str], Optional[EvalError]]:
    """Run one cell; atomic-on-failure.

    Returns (env', outputs, error). On success env' is a forked copy with
    the cell's assignments applied; on error env' is the caller's env
    unchanged and outputs holds whatever was emitted before the failure.
    """
    work = env.fork()
    ctx = _Ctx()
    for stmt in prog.stmts:
        try:
            if isinstance(stmt, Assign):
                work.set(stmt.name, _eval_expr(stmt.expr, work, ctx))
            elif isinstance(stmt, ExprStmt):
                value = _eval_expr(stmt.expr, work, ctx)
                direct_show = (
                    isinstance(stmt.expr, Call) and stmt.expr.func == "show"
                )
                if not direct_show:  # show() already emitted
                    ctx.outputs.append(render(value))
            else:
                raise AssertionError(f"unhandled stmt {stmt!r}")
        except MiniLangError as exc:
            return env, ctx.outputs, exc.error
    return work, ctx.outputs, None


def run_source(source: str, env: Environment) -> tuple[Environment, list[str], Optional[EvalError]]:
    """parse + eval_cell; lex/parse failures come back in the error slot."""
    try:
        prog = parse(source)
    except MiniLangError as exc:
        return env, [], exc.error
    return eval_cell(prog, env)
