"""Small expression language with a recursive-descent parser, a
pretty-printer and second-order forward-mode differentiation.

Grammar (EBNF)::

    expr    = term , { ("+" | "-") , term } ;
    term    = unary , { ("*" | "/") , unary } ;
    unary   = "-" , unary | power ;
    power   = atom , [ "^" , [ "-" ] , integer ] ;
    atom    = number | variable | func , "(" , expr , ")" | "(" , expr , ")" ;
    func    = "exp" | "log" | "sin" | "cos" ;
    variable= "x" , integer ;          (* x1, x2, ... *)
    number  = digits , [ "." , digits ] ;

So ``-x1^2`` means ``-(x1^2)`` and ``2*x1^2`` means ``2*(x1^2)``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .numeric_core import DimensionMismatch, as_vector


class ExprSyntaxError(SyntaxError):
    def __init__(self, message: str, position: int, expected: str, text: str = ""):
        line = text.count("\n", 0, position) + 1
        column = position - (text.rfind("\n", 0, position) + 1) + 1
        super().__init__(f"{message} at line {line}, column {column}: expected {expected}")
        self.position = position
        self.expected = expected
        self.line = line
        self.column = column


class DomainError(ArithmeticError):
    """Evaluation left the natural domain (log of a nonpositive number, division by zero)."""


# --- AST -------------------------------------------------------------------


@dataclass(frozen=True)
class Const:
    value: Fraction


@dataclass(frozen=True)
class Var:
    index: int  # 1-based, as written


@dataclass(frozen=True)
class Neg:
    arg: "Expr"


@dataclass(frozen=True)
class Add:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Sub:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Mul:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Div:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exponent: int


@dataclass(frozen=True)
class Call:
    name: str
    arg: "Expr"


Expr = Const | Var | Neg | Add | Sub | Mul | Div | Pow | Call

FUNCTIONS = ("exp", "log", "sin", "cos")

# --- tokenizer ---------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+(?:\.\d+)?)|(?P<var>x\d+)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^()]))")


@dataclass
class _Tok:
    kind: str
    text: str
    pos: int


def _tokenize(text: str) -> list[_Tok]:
    toks, i = [], 0
    while i < len(text):
        if text[i].isspace():
            i += 1
            continue
        m = _TOKEN.match(text, i)
        if not m or m.end() == i:
            raise ExprSyntaxError(f"unexpected character {text[i]!r}", i, "a number, variable, function or operator", text)
        kind = m.lastgroup
        start = m.start(kind)
        toks.append(_Tok(kind, m.group(kind), start))
        i = m.end()
    toks.append(_Tok("end", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def take(self) -> _Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def fail(self, expected: str):
        t = self.peek()
        found = "end of input" if t.kind == "end" else repr(t.text)
        raise ExprSyntaxError(f"unexpected {found}", t.pos, expected, self.text)

    def expect_op(self, op: str):
        t = self.peek()
        if t.kind == "op" and t.text == op:
            return self.take()
        self.fail(repr(op))

    def parse(self) -> Expr:
        e = self.expr()
        if self.peek().kind != "end":
            self.fail("an operator or end of input")
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.take().text
            r = self.term()
            e = Add(e, r) if op == "+" else Sub(e, r)
        return e

    def term(self) -> Expr:
        e = self.unary()
        while self.peek().kind == "op" and self.peek().text in "*/":
            op = self.take().text
            r = self.unary()
            e = Mul(e, r) if op == "*" else Div(e, r)
        return e

    def unary(self) -> Expr:
        t = self.peek()
        if t.kind == "op" and t.text == "-":
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        t = self.peek()
        if t.kind == "op" and t.text == "^":
            self.take()
            sign = 1
            if self.peek().kind == "op" and self.peek().text == "-":
                self.take()
                sign = -1
            n = self.peek()
            if n.kind != "num" or "." in n.text:
                self.fail("an integer exponent")
            self.take()
            return Pow(base, sign * int(n.text))
        return base

    def atom(self) -> Expr:
        t = self.peek()
        if t.kind == "num":
            self.take()
            return Const(Fraction(t.text))
        if t.kind == "var":
            self.take()
            idx = int(t.text[1:])
            if idx < 1:
                raise ExprSyntaxError("variables are numbered from 1", t.pos, "x1, x2, ...", self.text)
            return Var(idx)
        if t.kind == "name":
            if t.text not in FUNCTIONS:
                raise ExprSyntaxError(f"unknown name {t.text!r}", t.pos, "one of " + ", ".join(FUNCTIONS), self.text)
            self.take()
            self.expect_op("(")
            arg = self.expr()
            self.expect_op(")")
            return Call(t.text, arg)
        if t.kind == "op" and t.text == "(":
            self.take()
            e = self.expr()
            self.expect_op(")")
            return e
        self.fail("a number, variable, function call or '('")


def parse(text: str) -> Expr:
    return _Parser(text).parse()


# --- printing ----------------------------------------------------------------

_PREC = {Add: 1, Sub: 1, Mul: 2, Div: 2, Neg: 3, Pow: 4}


def _prec(e: Expr) -> int:
    if isinstance(e, Const) and e.value < 0:
        return 3
    return _PREC.get(type(e), 5)


def _decimal_text(v: Fraction) -> str | None:
    """Exact decimal spelling when the denominator divides a power of ten."""
    d, twos, fives = v.denominator, 0, 0
    while d % 2 == 0:
        d //= 2
        twos += 1
    while d % 5 == 0:
        d //= 5
        fives += 1
    if d != 1:
        return None
    digits = max(twos, fives)
    scaled = abs(v.numerator) * (10 ** digits // v.denominator)
    whole, frac = divmod(scaled, 10 ** digits)
    text = f"{whole}.{frac:0{digits}d}"
    return text if v >= 0 else "-" + text


def pretty(e: Expr) -> str:
    """Canonical text with the fewest parentheses that parse back to e."""
    if isinstance(e, Const):
        v = e.value
        if v.denominator == 1:
            return str(v.numerator) if v >= 0 else f"-{-v.numerator}"
        text = _decimal_text(v)
        return text if text is not None else f"({v.numerator}/{v.denominator})"
    if isinstance(e, Var):
        return f"x{e.index}"
    if isinstance(e, Call):
        return f"{e.name}({pretty(e.arg)})"
    if isinstance(e, Neg):
        inner = pretty(e.arg)
        return "-" + (inner if _prec(e.arg) >= 3 and not inner.startswith("-") else f"({inner})")
    if isinstance(e, Pow):
        b = pretty(e.base)
        if _prec(e.base) <= 4 or b.startswith("-"):
            b = f"({b})"
        return f"{b}^{e.exponent}"
    op = {Add: "+", Sub: "-", Mul: "*", Div: "/"}[type(e)]
    p = _prec(e)
    left = pretty(e.left)
    if _prec(e.left) < p:
        left = f"({left})"
    right = pretty(e.right)
    if _prec(e.right) <= p:
        right = f"({right})"
    return f"{left} {op} {right}"


def max_var(e: Expr) -> int:
    if isinstance(e, Var):
        return e.index
    if isinstance(e, Const):
        return 0
    if isinstance(e, (Neg, Call)):
        return max_var(e.arg)
    if isinstance(e, Pow):
        return max_var(e.base)
    return max(max_var(e.left), max_var(e.right))


# --- evaluation --------------------------------------------------------------


def evaluate(e: Expr, x) -> float:
    """Plain float evaluation."""
    if isinstance(e, Const):
        return float(e.value)
    if isinstance(e, Var):
        return float(x[e.index - 1])
    if isinstance(e, Neg):
        return -evaluate(e.arg, x)
    if isinstance(e, Add):
        return evaluate(e.left, x) + evaluate(e.right, x)
    if isinstance(e, Sub):
        return evaluate(e.left, x) - evaluate(e.right, x)
    if isinstance(e, Mul):
        return evaluate(e.left, x) * evaluate(e.right, x)
    if isinstance(e, Div):
        d = evaluate(e.right, x)
        if d == 0.0:
            raise DomainError("division by zero")
        return evaluate(e.left, x) / d
    if isinstance(e, Pow):
        b = evaluate(e.base, x)
        if b == 0.0 and e.exponent < 0:
            raise DomainError("negative power of zero")
        return b ** e.exponent
    if isinstance(e, Call):
        a = evaluate(e.arg, x)
        if e.name == "log":
            if a <= 0.0:
                raise DomainError("log of a nonpositive number")
            return math.log(a)
        return {"exp": math.exp, "sin": math.sin, "cos": math.cos}[e.name](a)
    raise TypeError(f"not an expression: {e!r}")


class Jet:
    """Second-order dual number: value, gradient and Hessian."""

    __slots__ = ("v", "g", "H")

    def __init__(self, v: float, g: np.ndarray, H: np.ndarray):
        self.v, self.g, self.H = v, g, H

    @classmethod
    def const(cls, v: float, n: int) -> "Jet":
        return cls(v, np.zeros(n), np.zeros((n, n)))

    @classmethod
    def variable(cls, v: float, i: int, n: int) -> "Jet":
        g = np.zeros(n)
        g[i] = 1.0
        return cls(v, g, np.zeros((n, n)))

    def __add__(self, o: "Jet") -> "Jet":
        return Jet(self.v + o.v, self.g + o.g, self.H + o.H)

    def __sub__(self, o: "Jet") -> "Jet":
        return Jet(self.v - o.v, self.g - o.g, self.H - o.H)

    def __neg__(self) -> "Jet":
        return Jet(-self.v, -self.g, -self.H)

    def __mul__(self, o: "Jet") -> "Jet":
        cross = np.outer(self.g, o.g)
        return Jet(self.v * o.v, self.v * o.g + o.v * self.g,
                   self.v * o.H + o.v * self.H + cross + cross.T)

    def chain(self, f0: float, f1: float, f2: float) -> "Jet":
        """Compose with a scalar function whose derivatives at v are f0, f1, f2."""
        return Jet(f0, f1 * self.g, f1 * self.H + f2 * np.outer(self.g, self.g))

    def power(self, k: int) -> "Jet":
        if k == 0:
            return Jet.const(1.0, self.g.shape[0])
        a = self.v
        if a == 0.0 and k < 0:
            raise DomainError("negative power of zero")
        f1 = k * a ** (k - 1) if k != 0 else 0.0
        f2 = k * (k - 1) * a ** (k - 2) if k not in (0, 1) else 0.0
        return self.chain(a ** k, f1, f2)

    def reciprocal(self) -> "Jet":
        if self.v == 0.0:
            raise DomainError("division by zero")
        a = self.v
        return self.chain(1.0 / a, -1.0 / a ** 2, 2.0 / a ** 3)


def _jet(e: Expr, x: np.ndarray) -> Jet:
    n = x.shape[0]
    if isinstance(e, Const):
        return Jet.const(float(e.value), n)
    if isinstance(e, Var):
        return Jet.variable(float(x[e.index - 1]), e.index - 1, n)
    if isinstance(e, Neg):
        return -_jet(e.arg, x)
    if isinstance(e, Add):
        return _jet(e.left, x) + _jet(e.right, x)
    if isinstance(e, Sub):
        return _jet(e.left, x) - _jet(e.right, x)
    if isinstance(e, Mul):
        return _jet(e.left, x) * _jet(e.right, x)
    if isinstance(e, Div):
        return _jet(e.left, x) * _jet(e.right, x).reciprocal()
    if isinstance(e, Pow):
        return _jet(e.base, x).power(e.exponent)
    if isinstance(e, Call):
        a = _jet(e.arg, x)
        v = a.v
        if e.name == "exp":
            ev = math.exp(v)
            return a.chain(ev, ev, ev)
        if e.name == "log":
            if v <= 0.0:
                raise DomainError("log of a nonpositive number")
            return a.chain(math.log(v), 1.0 / v, -1.0 / v ** 2)
        if e.name == "sin":
            return a.chain(math.sin(v), math.cos(v), -math.sin(v))
        if e.name == "cos":
            return a.chain(math.cos(v), -math.sin(v), -math.cos(v))
    raise TypeError(f"not an expression: {e!r}")


@dataclass
class SmoothMapAtPoint:
    value: np.ndarray
    jacobian: np.ndarray
    hessians: list[np.ndarray]

    @property
    def out_dim(self) -> int:
        return self.value.shape[0]

    @property
    def in_dim(self) -> int:
        return self.jacobian.shape[1]


def _as_expr(e) -> Expr:
    return parse(e) if isinstance(e, str) else e


def differentiate_at(exprs, x) -> SmoothMapAtPoint:
    """Value, Jacobian (rows = components) and Hessians of each component at x."""
    x = as_vector(x)
    n = x.shape[0]
    exprs = [_as_expr(e) for e in exprs]
    for e in exprs:
        if max_var(e) > n:
            raise DimensionMismatch(f"expression uses x{max_var(e)} but the point has {n} coordinates")
    jets = [_jet(e, x) for e in exprs]
    value = np.array([j.v for j in jets], dtype=float)
    jac = np.array([j.g for j in jets], dtype=float).reshape(len(jets), n)
    hess = [j.H for j in jets]
    return SmoothMapAtPoint(value, jac, hess)


def second_directional(m: SmoothMapAtPoint, u) -> np.ndarray:
    """Componentwise u^T H_i u."""
    u = np.asarray(u, dtype=float).reshape(-1)
    if u.shape[0] != m.in_dim:
        raise DimensionMismatch(f"direction has length {u.shape[0]}, map has {m.in_dim} inputs")
    return np.array([u @ H @ u for H in m.hessians], dtype=float)


def evaluate_map(exprs, x) -> np.ndarray:
    return np.array([evaluate(_as_expr(e), x) for e in exprs], dtype=float)
