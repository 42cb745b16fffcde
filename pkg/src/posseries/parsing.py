"""Recursive-descent parsers for series and index-set expressions.

Series::

    mb:k=<int>,s=<num> | harmonic | prime-recip | olivier | sqw:p=<num> | blocks
    abel(<series>) | restrict(<series>,<set>) | perm(<series>,<int>|growing)
    term:<expr>[@<start>]

Sets::

    all | evens | odds | squares | pow2 | primes | blocks
    pred:<expr> | finite:{<int>,...} | not(<set>) | and(<set>,<set>) | or(<set>,<set>)

``<expr>`` is arithmetic in ``n`` with + - * / // % ^ (or **), comparisons,
``and``/``or``/``not`` and the functions listed in ``FUNCTIONS``. It is
compiled to a small tree and evaluated with numpy; nothing is handed to
``eval``. Whitespace is ignored. Every parsed object renders back to a
canonical string that parses to an equal object.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .density import BUILTIN_SETS, IndexSet
from .errors import InvalidSpec, ParseError
from .primes import is_prime_array
from .series_core import (
    MB,
    AbelTransformOf,
    BlockCounterexample,
    BlockPermuted,
    Harmonic,
    OlivierCounterexample,
    PrimeReciprocal,
    RestrictedTo,
    SeriesSpec,
    SquareWeighted,
    _num,
)


def _issquare(x):
    x = np.asarray(x)
    r = np.round(np.sqrt(np.maximum(x, 0)))
    return (r * r == x) & (x >= 0)


FUNCTIONS: dict[str, Callable] = {
    "log": np.log,
    "ln": np.log,
    "log2": np.log2,
    "log10": np.log10,
    "sqrt": np.sqrt,
    "exp": np.exp,
    "floor": np.floor,
    "ceil": np.ceil,
    "abs": np.abs,
    "isprime": lambda x: is_prime_array(np.asarray(x, dtype=np.int64)),
    "issquare": _issquare,
}

# Binary operators by precedence level, loosest first.
_LEVELS = [("or",), ("and",), ("==", "!=", "<=", ">=", "<", ">"), ("+", "-"), ("*", "//", "/", "%")]
_PREC = {op: i for i, ops in enumerate(_LEVELS) for op in ops}
_NOT_PREC = 1.5
_NEG_PREC = len(_LEVELS)
_POW_PREC = len(_LEVELS) + 1


# -- expression trees ----------------------------------------------------------------


@dataclass(frozen=True)
class Node:
    kind: str  # num | var | call | unary | bin
    value: object = None
    args: tuple = ()

    def render(self, parent: float = -1) -> str:
        if self.kind == "num":
            return str(self.value) if isinstance(self.value, int) else repr(float(self.value))
        if self.kind == "var":
            return "n"
        if self.kind == "call":
            return f"{self.value}({self.args[0].render()})"
        if self.kind == "unary":
            if self.value == "not":
                text, prec = "not " + self.args[0].render(_PREC["=="]), _NOT_PREC
            else:
                text, prec = "-" + self.args[0].render(_NEG_PREC), _NEG_PREC
            return f"({text})" if parent > prec else text
        op = self.value
        if op == "^":
            prec = _POW_PREC
            left, right = self.args[0].render(prec + 0.5), self.args[1].render(_NEG_PREC)
        else:
            prec = _PREC[op]
            chained = op in _LEVELS[2]
            left = self.args[0].render(prec + 0.5 if chained else prec)
            right = self.args[1].render(prec + 0.5)
        sep = f" {op} " if op in ("and", "or") else op
        text = left + sep + right
        return f"({text})" if prec < parent else text

    def evaluate(self, n: np.ndarray):
        if self.kind == "num":
            return self.value
        if self.kind == "var":
            return n
        if self.kind == "call":
            return FUNCTIONS[self.value](self.args[0].evaluate(n))
        if self.kind == "unary":
            x = self.args[0].evaluate(n)
            return np.logical_not(x) if self.value == "not" else -x
        a, b = (arg.evaluate(n) for arg in self.args)
        op = self.value
        with np.errstate(all="ignore"):
            if op == "+":
                return a + b
            if op == "-":
                return a - b
            if op == "*":
                return a * b
            if op == "/":
                return np.true_divide(a, b)
            if op == "//":
                return np.floor_divide(a, b)
            if op == "%":
                return np.mod(a, b)
            if op == "^":
                if isinstance(b, int) and b >= 0 and np.asarray(a).dtype.kind == "i":
                    return a**b
                return np.power(np.asarray(a, dtype=float), b)
            if op == "==":
                return a == b
            if op == "!=":
                return a != b
            if op == "<":
                return a < b
            if op == "<=":
                return a <= b
            if op == ">":
                return a > b
            if op == ">=":
                return a >= b
            if op == "and":
                return np.logical_and(a, b)
            if op == "or":
                return np.logical_or(a, b)
        raise AssertionError(op)


# -- parsed objects that need their source text ------------------------------------


@dataclass(frozen=True)
class ExpressionSeries(SeriesSpec):
    """Series whose term is an expression in n."""

    expr: Node = field(compare=False)
    text: str = ""
    start: int = 1

    def terms(self, n):
        n = np.asarray(n, dtype=float)
        return np.broadcast_to(np.asarray(self.expr.evaluate(n), dtype=float), n.shape).copy()

    def canonical(self):
        return f"term:{self.text}" + (f"@{self.start}" if self.start != 1 else "")


def predicate_set(expr: Node) -> IndexSet:
    text = expr.render()

    def contains(n):
        out = np.asarray(expr.evaluate(np.asarray(n, dtype=np.int64)))
        if out.dtype != bool:
            raise InvalidSpec(f"pred:{text} is not a boolean expression")
        return np.broadcast_to(out, np.shape(n))

    return IndexSet(f"pred:{text}", contains)


# -- parser ------------------------------------------------------------------------

_NUMBER = re.compile(r"[0-9]+(\.[0-9]*)?([eE][+-]?[0-9]+)?|\.[0-9]+([eE][+-]?[0-9]+)?")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_SERIES_WORDS = {
    "harmonic": Harmonic,
    "prime-recip": PrimeReciprocal,
    "olivier": OlivierCounterexample,
    "blocks": BlockCounterexample,
}


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    # low-level helpers
    def error(self, message: str, pos: int | None = None):
        raise ParseError(message, self.text, self.pos if pos is None else pos)

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self, s: str) -> bool:
        self.skip()
        return self.text.startswith(s, self.pos)

    def accept(self, s: str) -> bool:
        if self.peek(s):
            self.pos += len(s)
            return True
        return False

    def expect(self, s: str):
        if not self.accept(s):
            self.error(f"expected {s!r}")

    def at_end(self) -> bool:
        self.skip()
        return self.pos >= len(self.text)

    def number(self) -> float:
        self.skip()
        sign = -1 if self.accept("-") else 1
        self.skip()
        m = _NUMBER.match(self.text, self.pos)
        if not m:
            self.error("expected a number")
        self.pos = m.end()
        return sign * float(m.group())

    def integer(self) -> int:
        at = self.pos
        x = self.number()
        if not x.is_integer():
            self.error("expected an integer", at)
        return int(x)

    def word(self) -> str:
        self.skip()
        m = re.compile(r"[A-Za-z][A-Za-z0-9_-]*").match(self.text, self.pos)
        if not m:
            self.error("expected a name")
        self.pos = m.end()
        return m.group()

    # series
    def series(self) -> SeriesSpec:
        self.skip()
        at = self.pos
        if self.accept("mb:"):
            self.expect("k=")
            k = self.integer()
            self.expect(",")
            self.expect("s=")
            s = self.number()
            try:
                return MB(k, s)
            except InvalidSpec as exc:
                self.error(str(exc), at)
        if self.accept("sqw:"):
            self.expect("p=")
            return SquareWeighted(self.number())
        if self.accept("term:"):
            expr_at = self.pos
            expr = self.expr()
            if expr.kind == "bin" and expr.value in _LEVELS[0] + _LEVELS[1] + _LEVELS[2]:
                self.error("a term expression must be numeric", expr_at)
            start = self.integer() if self.accept("@") else 1
            if start < 1:
                self.error("start index must be >= 1")
            return ExpressionSeries(expr, expr.render(), start)
        name = self.word()
        if name in _SERIES_WORDS and not self.peek("("):
            return _SERIES_WORDS[name]()
        if name == "abel":
            self.expect("(")
            inner = self.series()
            self.expect(")")
            return AbelTransformOf(inner)
        if name == "restrict":
            self.expect("(")
            inner = self.series()
            self.expect(",")
            S = self.set()
            self.expect(")")
            return RestrictedTo(inner, S)
        if name == "perm":
            self.expect("(")
            inner = self.series()
            self.expect(",")
            blocks = "growing" if self.accept("growing") else self.integer()
            self.expect(")")
            try:
                return BlockPermuted(inner, blocks)
            except InvalidSpec as exc:
                self.error(str(exc), at)
        self.error(f"unknown series {name!r}", at)

    # sets
    def set(self) -> IndexSet:
        self.skip()
        at = self.pos
        if self.accept("pred:"):
            return predicate_set(self.expr())
        if self.accept("finite:"):
            self.expect("{")
            elems = []
            if not self.peek("}"):
                elems.append(self.integer())
                while self.accept(","):
                    elems.append(self.integer())
            self.expect("}")
            elems = sorted(set(elems))
            if any(e < 1 for e in elems):
                self.error("finite sets hold positive integers", at)
            return IndexSet.finite(elems, "finite:{" + ",".join(map(str, elems)) + "}")
        name = self.word()
        if name in BUILTIN_SETS and not self.peek("("):
            return BUILTIN_SETS[name]
        if name == "not":
            self.expect("(")
            S = self.set()
            self.expect(")")
            return S.complement()
        if name in ("and", "or"):
            self.expect("(")
            A = self.set()
            self.expect(",")
            B = self.set()
            self.expect(")")
            return A & B if name == "and" else A | B
        self.error(f"unknown set {name!r}", at)

    # expressions
    def expr(self, level: int = 0) -> Node:
        if level == len(_LEVELS):
            return self.unary()
        left = self.expr(level + 1)
        while True:
            op = self._binop(level)
            if op is None:
                return left
            right = self.expr(level + 1)
            left = Node("bin", op, (left, right))
            if level == 2:  # comparisons do not chain
                return left

    def _binop(self, level: int) -> str | None:
        self.skip()
        for op in sorted(_LEVELS[level], key=len, reverse=True):
            if op.isalpha():
                m = _IDENT.match(self.text, self.pos)
                if m and m.group() == op:
                    self.pos = m.end()
                    return op
            elif self.text.startswith(op, self.pos):
                if op == "*" and self.text.startswith("**", self.pos):
                    continue
                self.pos += len(op)
                return op
        return None

    def unary(self) -> Node:
        if self.accept("-"):
            return Node("unary", "-", (self.unary(),))
        self.skip()
        m = _IDENT.match(self.text, self.pos)
        if m and m.group() == "not":
            self.pos = m.end()
            return Node("unary", "not", (self.expr(2),))
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.accept("^") or self.accept("**"):
            return Node("bin", "^", (base, self.unary()))
        return base

    def atom(self) -> Node:
        self.skip()
        at = self.pos
        if self.accept("("):
            inner = self.expr()
            self.expect(")")
            return inner
        m = _NUMBER.match(self.text, self.pos)
        if m:
            self.pos = m.end()
            x = float(m.group())
            is_int = x.is_integer() and not any(c in m.group() for c in ".eE")
            return Node("num", int(x) if is_int else x)
        m = _IDENT.match(self.text, self.pos)
        if not m:
            self.error("expected a number, n, a function call or '('")
        self.pos = m.end()
        name = m.group()
        if name == "n":
            return Node("var")
        if name in FUNCTIONS:
            self.expect("(")
            arg = self.expr()
            self.expect(")")
            return Node("call", name, (arg,))
        if name in ("pi", "e"):
            return Node("num", math.pi if name == "pi" else math.e)
        self.error(f"unknown name {name!r}", at)

    def finish(self, obj):
        if not self.at_end():
            self.error("unexpected trailing input")
        return obj


def parse_series(text: str) -> SeriesSpec:
    p = _Parser(text)
    return p.finish(p.series())


def parse_set(text: str) -> IndexSet:
    p = _Parser(text)
    return p.finish(p.set())


def parse_expression(text: str) -> SeriesSpec | IndexSet:
    """A series if the text parses as one, otherwise a set."""
    try:
        return parse_series(text)
    except ParseError as first:
        try:
            return parse_set(text)
        except ParseError as second:
            raise (first if first.offset >= second.offset else second) from None


def canonical(obj: SeriesSpec | IndexSet) -> str:
    return obj.name if isinstance(obj, IndexSet) else obj.canonical()


# -- numeric argument helpers for the CLI ----------------------------------------------


def parse_int(text: str) -> int:
    """Integers written as 1000000 or 1e6."""
    try:
        x = float(text)
    except ValueError:
        raise ParseError("expected an integer", text, 0) from None
    if not x.is_integer():
        raise ParseError("expected an integer", text, 0)
    return int(x)


def parse_checkpoints(text: str) -> list[int]:
    """``lo:hi[:per_decade]`` for log-spaced points, or a comma list."""
    from .density import default_checkpoints

    if ":" in text:
        parts = text.split(":")
        if len(parts) not in (2, 3):
            raise ParseError("expected lo:hi or lo:hi:per_decade", text, 0)
        lo, hi = parse_int(parts[0]), parse_int(parts[1])
        per = parse_int(parts[2]) if len(parts) == 3 else 3
        if not 1 <= lo < hi or per < 1:
            raise ParseError("need 1 <= lo < hi and per_decade >= 1", text, 0)
        return default_checkpoints(lo, hi, per)
    out, offset = [], 0
    for part in text.split(","):
        try:
            out.append(parse_int(part))
        except ParseError:
            raise ParseError("expected an integer", text, offset) from None
        offset += len(part) + 1
    if any(b <= a for a, b in zip(out, out[1:])) or out[0] < 1:
        raise ParseError("checkpoints must be positive and strictly increasing", text, 0)
    return out


def parse_floats(text: str) -> list[float]:
    out, offset = [], 0
    for part in text.split(","):
        try:
            out.append(float(part))
        except ValueError:
            raise ParseError("expected a number", text, offset) from None
        offset += len(part) + 1
    return out
