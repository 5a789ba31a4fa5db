"""Tiny real-valued expression language for matrix entries and forcing terms.

Grammar (EBNF):

    expr    = term { ("+" | "-") term } ;
    term    = unary { ("*" | "/") unary } ;
    unary   = "-" unary | power ;
    power   = atom [ "^" unary ] ;            (* right associative *)
    atom    = NUMBER | NAME | NAME "(" expr ")" | "(" expr ")" ;

NAME is a variable (``t`` or a config parameter), one of the constants ``pi``
and ``e``, or a call to sin, cos, tan, exp, ln, sqrt, abs, floor.  Evaluation
is plain IEEE double arithmetic and raises on out-of-domain arguments instead
of producing complex or non-finite values.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Mapping, Union

from .errors import DomainError, ExprSyntaxError, UnboundVariable, UnknownFunction

FUNCTIONS: dict[str, Callable[[float], float]] = {
    "sin": math.sin,
    "cos": math.cos,
    "tan": math.tan,
    "exp": math.exp,
    "ln": None,      # handled with a domain check
    "sqrt": None,    # handled with a domain check
    "abs": abs,
    "floor": math.floor,
}

CONSTANTS = {"pi": math.pi, "e": math.e}


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Const:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Expr"


Expr = Union[Num, Var, Const, Neg, BinOp, Call]

_NUMBER = re.compile(r"(\d+\.\d*|\.\d+|\d+)([eE][+-]?\d+)?")


class _Parser:
    def __init__(self, src: str):
        self.src = src
        self.pos = 0
        self.tokens: list[tuple[str, str, int]] = []
        self._tokenize()
        self.i = 0

    def _tokenize(self):
        pos = 0
        n = len(self.src)
        while pos < n:
            while pos < n and self.src[pos].isspace():
                pos += 1
            if pos >= n:
                break
            m = _NUMBER.match(self.src, pos)
            if m:
                self.tokens.append(("num", m.group(0), pos))
                pos = m.end()
                continue
            ch = self.src[pos]
            if ch.isalpha() or ch == "_":
                j = pos
                while j < n and (self.src[j].isalnum() or self.src[j] == "_"):
                    j += 1
                self.tokens.append(("name", self.src[pos:j], pos))
                pos = j
                continue
            if ch in "()+-*/^":
                self.tokens.append(("op", ch, pos))
                pos += 1
                continue
            raise ExprSyntaxError(pos, "a number, name, operator or parenthesis")
        self.tokens.append(("end", "", n))

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, ch: str):
        kind, text, pos = self.peek()
        if kind == "op" and text == ch:
            return self.take()
        raise ExprSyntaxError(pos, f"{ch!r}")

    def parse(self) -> Expr:
        e = self.expr()
        kind, _, pos = self.peek()
        if kind != "end":
            raise ExprSyntaxError(pos, "end of input")
        return e

    def expr(self) -> Expr:
        node = self.term()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in "+-":
                self.take()
                node = BinOp(text, node, self.term())
            else:
                return node

    def term(self) -> Expr:
        node = self.unary()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in "*/":
                self.take()
                node = BinOp(text, node, self.unary())
            else:
                return node

    def unary(self) -> Expr:
        kind, text, _ = self.peek()
        if kind == "op" and text == "-":
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        kind, text, _ = self.peek()
        if kind == "op" and text == "^":
            self.take()
            return BinOp("^", base, self.unary())
        return base

    def atom(self) -> Expr:
        kind, text, pos = self.take()
        if kind == "num":
            return Num(float(text))
        if kind == "name":
            nxt_kind, nxt_text, _ = self.peek()
            if nxt_kind == "op" and nxt_text == "(":
                if text not in FUNCTIONS:
                    raise UnknownFunction(text, pos)
                self.take()
                arg = self.expr()
                self.expect_op(")")
                return Call(text, arg)
            if text in CONSTANTS:
                return Const(text)
            return Var(text)
        if kind == "op" and text == "(":
            inner = self.expr()
            self.expect_op(")")
            return inner
        raise ExprSyntaxError(pos, "an operand")


def parse(src: str) -> Expr:
    return _Parser(src).parse()


def _apply(func: str, x: float) -> float:
    if func == "ln":
        if x <= 0.0:
            raise DomainError(f"ln of non-positive value {x}")
        return math.log(x)
    if func == "sqrt":
        if x < 0.0:
            raise DomainError(f"sqrt of negative value {x}")
        return math.sqrt(x)
    return FUNCTIONS[func](x)


def evaluate(e: Expr, t: float, params: Mapping[str, float] | None = None) -> float:
    params = params or {}
    match e:
        case Num(value):
            return value
        case Const(name):
            return CONSTANTS[name]
        case Var(name):
            if name == "t":
                return t
            if name in params:
                return float(params[name])
            raise UnboundVariable(name)
        case Neg(operand):
            return -evaluate(operand, t, params)
        case Call(func, arg):
            return _apply(func, evaluate(arg, t, params))
        case BinOp(op, left, right):
            lv = evaluate(left, t, params)
            rv = evaluate(right, t, params)
            return _binop(op, lv, rv)
    raise TypeError(f"not an expression node: {e!r}")


def _binop(op: str, lv: float, rv: float) -> float:
    if op == "+":
        return lv + rv
    if op == "-":
        return lv - rv
    if op == "*":
        return lv * rv
    if op == "/":
        if rv == 0.0:
            raise DomainError("division by zero")
        return lv / rv
    if op == "^":
        if lv < 0.0 and rv != math.floor(rv):
            raise DomainError(f"fractional power of negative base {lv}")
        return lv ** rv
    raise ValueError(f"unknown operator {op!r}")


def to_string(e: Expr) -> str:
    """Fully parenthesized rendering that parses back to an equivalent tree."""
    match e:
        case Num(value):
            return repr(value)
        case Const(name) | Var(name):
            return name
        case Neg(operand):
            return f"(-{to_string(operand)})"
        case Call(func, arg):
            return f"{func}({to_string(arg)})"
        case BinOp(op, left, right):
            return f"({to_string(left)}{op}{to_string(right)})"
    raise TypeError(f"not an expression node: {e!r}")


def free_variables(e: Expr) -> set[str]:
    match e:
        case Num(_) | Const(_):
            return set()
        case Var(name):
            return set() if name == "t" else {name}
        case Neg(operand):
            return free_variables(operand)
        case Call(_, arg):
            return free_variables(arg)
        case BinOp(_, left, right):
            return free_variables(left) | free_variables(right)
    raise TypeError(f"not an expression node: {e!r}")


def compile_expr(e: Expr, params: Mapping[str, float] | None = None,
                 variables: tuple[str, ...] = ("t",)) -> Callable[..., float]:
    """Build a closure evaluating the expression at the given variables.

    Unbound names are resolved eagerly so a bad config fails at compile time.
    """
    params = dict(params or {})

    def build(node) -> Callable[..., float]:
        match node:
            case Num(value):
                return lambda *args: value
            case Const(name):
                c = CONSTANTS[name]
                return lambda *args: c
            case Var(name):
                if name in variables:
                    k = variables.index(name)
                    return lambda *args: args[k]
                if name in params:
                    v = float(params[name])
                    return lambda *args: v
                raise UnboundVariable(name)
            case Neg(operand):
                g = build(operand)
                return lambda *args: -g(*args)
            case Call(func, arg):
                g = build(arg)
                return lambda *args: _apply(func, g(*args))
            case BinOp(op, left, right):
                gl, gr = build(left), build(right)
                return lambda *args: _binop(op, gl(*args), gr(*args))
        raise TypeError(f"not an expression node: {node!r}")

    return build(e)
