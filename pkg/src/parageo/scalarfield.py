"""Smooth scalar expressions of the parameters ``x1..xd`` evaluated as 2-jets.

Expressions are parsed once into an immutable AST and then evaluated at
parameter points.  Evaluation propagates value, gradient and Hessian in a
single second-order forward pass, which is everything the frame, metric and
curvature computations downstream need.  The parameter count ``d`` is tiny in
practice, so dense Hessians are cheap.

Grammar (whitespace insignificant, parentheses allowed)::

    expr    :=  term  (('+' | '-') term)*
    term    :=  unary (('*' | '/') unary)*
    unary   :=  '-' unary | power
    power   :=  atom ('^' intlit)*                  # left-associative
    atom    :=  NUMBER | 'x'<k> | fn '(' expr ')'
              | 'pow' '(' expr ',' intlit ')' | '(' expr ')'
    intlit  :=  ['-'] DIGITS
    fn      :=  sin | cos | sinh | cosh | exp | ln | sqrt

Exponents are restricted to integer literals so differentiation stays total;
fractional powers must be written via sqrt or exp/ln.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, EvalDomainError, ExprParseError

__all__ = [
    "Expr",
    "Const",
    "Var",
    "Neg",
    "BinOp",
    "Pow",
    "Fun",
    "Jet2",
    "parse",
    "eval_jet2",
    "to_source",
    "constant",
    "coordinate",
]

FUNCTION_NAMES = ("sin", "cos", "sinh", "cosh", "exp", "ln", "sqrt")


class Expr:
    """Abstract syntax tree node for a scalar expression."""

    __slots__ = ()

    def __str__(self) -> str:
        return to_source(self)


@dataclass(frozen=True)
class Const(Expr):
    value: float


@dataclass(frozen=True)
class Var(Expr):
    index: int  # 1-based, matching the surface name x<index>


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True)
class BinOp(Expr):
    op: str  # one of + - * /
    lhs: Expr
    rhs: Expr


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exponent: int


@dataclass(frozen=True)
class Fun(Expr):
    name: str
    arg: Expr


def constant(value: float) -> Expr:
    return Const(float(value))


def coordinate(index: int) -> Expr:
    """Coordinate expression x<index> (1-based)."""
    return Var(index)


# ---------------------------------------------------------------------------
# Tokenizer
# ---------------------------------------------------------------------------

_OPERATOR_CHARS = "+-*/^(),"


@dataclass(frozen=True)
class _Token:
    kind: str  # NUM | IDENT | OP | END
    text: str
    offset: int


def _tokenize(source: str) -> list[_Token]:
    tokens: list[_Token] = []
    i, n = 0, len(source)
    while i < n:
        c = source[i]
        if c.isspace():
            i += 1
            continue
        if c.isdigit() or (c == "." and i + 1 < n and source[i + 1].isdigit()):
            start = i
            while i < n and source[i].isdigit():
                i += 1
            if i < n and source[i] == ".":
                i += 1
                while i < n and source[i].isdigit():
                    i += 1
            if i < n and source[i] in "eE":
                j = i + 1
                if j < n and source[j] in "+-":
                    j += 1
                if j < n and source[j].isdigit():
                    i = j
                    while i < n and source[i].isdigit():
                        i += 1
            tokens.append(_Token("NUM", source[start:i], start))
            continue
        if c.isalpha() or c == "_":
            start = i
            while i < n and (source[i].isalnum() or source[i] == "_"):
                i += 1
            tokens.append(_Token("IDENT", source[start:i], start))
            continue
        if c in _OPERATOR_CHARS:
            tokens.append(_Token("OP", c, i))
            i += 1
            continue
        raise ExprParseError(f"unexpected character {c!r}", i)
    tokens.append(_Token("END", "", n))
    return tokens


# ---------------------------------------------------------------------------
# Recursive-descent parser
# ---------------------------------------------------------------------------


class _Parser:
    def __init__(self, source: str, d: int):
        self.tokens = _tokenize(source)
        self.pos = 0
        self.d = d

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect_op(self, text: str) -> _Token:
        tok = self.peek()
        if tok.kind != "OP" or tok.text != text:
            raise ExprParseError(f"expected {text!r}", tok.offset)
        return self.advance()

    def parse(self) -> Expr:
        e = self.expr()
        tok = self.peek()
        if tok.kind != "END":
            raise ExprParseError(f"unexpected token {tok.text!r}", tok.offset)
        return e

    def expr(self) -> Expr:
        e = self.term()
        while True:
            tok = self.peek()
            if tok.kind == "OP" and tok.text in "+-":
                self.advance()
                e = BinOp(tok.text, e, self.term())
            else:
                return e

    def term(self) -> Expr:
        e = self.unary()
        while True:
            tok = self.peek()
            if tok.kind == "OP" and tok.text in "*/":
                self.advance()
                e = BinOp(tok.text, e, self.unary())
            else:
                return e

    def unary(self) -> Expr:
        tok = self.peek()
        if tok.kind == "OP" and tok.text == "-":
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        e = self.atom()
        while True:
            tok = self.peek()
            if tok.kind == "OP" and tok.text == "^":
                self.advance()
                e = Pow(e, self.int_literal())
            else:
                return e

    def int_literal(self) -> int:
        sign = 1
        tok = self.peek()
        if tok.kind == "OP" and tok.text == "-":
            self.advance()
            sign = -1
            tok = self.peek()
        if tok.kind != "NUM" or not tok.text.isdigit():
            raise ExprParseError("exponent must be an integer literal", tok.offset)
        self.advance()
        return sign * int(tok.text)

    def atom(self) -> Expr:
        tok = self.advance()
        if tok.kind == "NUM":
            return Const(float(tok.text))
        if tok.kind == "OP" and tok.text == "(":
            e = self.expr()
            self.expect_op(")")
            return e
        if tok.kind == "IDENT":
            name = tok.text
            if name in FUNCTION_NAMES:
                self.expect_op("(")
                arg = self.expr()
                self.expect_op(")")
                return Fun(name, arg)
            if name == "pow":
                self.expect_op("(")
                base = self.expr()
                self.expect_op(",")
                exponent = self.int_literal()
                self.expect_op(")")
                return Pow(base, exponent)
            if name.startswith("x") and name[1:].isdigit():
                index = int(name[1:])
                if not 1 <= index <= self.d:
                    raise ExprParseError(
                        f"variable {name} out of range (d={self.d})", tok.offset
                    )
                return Var(index)
            raise ExprParseError(f"unknown identifier {name!r}", tok.offset)
        if tok.kind == "END":
            raise ExprParseError("unexpected end of input", tok.offset)
        raise ExprParseError(f"unexpected token {tok.text!r}", tok.offset)


def parse(source: str, d: int) -> Expr:
    """Parse ``source`` into an expression over x1..xd.

    Raises ExprParseError with the byte offset of the first fault.
    """
    if not source or source.isspace():
        raise ExprParseError("empty expression", 0)
    if d < 1:
        raise ValueError("d must be >= 1")
    return _Parser(source, d).parse()


# ---------------------------------------------------------------------------
# Printing
# ---------------------------------------------------------------------------

_PREC_ADD, _PREC_MUL, _PREC_NEG, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4, 5


def _prec(e: Expr) -> int:
    if isinstance(e, BinOp):
        return _PREC_ADD if e.op in "+-" else _PREC_MUL
    if isinstance(e, Neg):
        return _PREC_NEG
    if isinstance(e, Pow):
        return _PREC_POW
    return _PREC_ATOM


def to_source(e: Expr) -> str:
    """Render an expression to text that parses back to an equivalent tree."""
    if isinstance(e, Const):
        return repr(e.value) if e.value >= 0 else f"({e.value!r})"
    if isinstance(e, Var):
        return f"x{e.index}"
    if isinstance(e, Neg):
        inner = to_source(e.arg)
        if _prec(e.arg) < _PREC_NEG:
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(e, BinOp):
        mine = _prec(e)
        left = to_source(e.lhs)
        if _prec(e.lhs) < mine:
            left = f"({left})"
        right = to_source(e.rhs)
        if _prec(e.rhs) <= mine:
            right = f"({right})"
        return f"{left} {e.op} {right}"
    if isinstance(e, Pow):
        base = to_source(e.base)
        if _prec(e.base) <= _PREC_POW:
            base = f"({base})"
        return f"{base}^{e.exponent}"
    if isinstance(e, Fun):
        return f"{e.name}({to_source(e.arg)})"
    raise TypeError(f"not an Expr: {e!r}")


# ---------------------------------------------------------------------------
# 2-jets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Jet2:
    """Value, gradient and Hessian of a scalar quantity at a parameter point.

    Arithmetic implements the exact product/quotient/chain rules, so the
    Hessian stays symmetric by construction.
    """

    value: float
    grad: np.ndarray  # (d,)
    hess: np.ndarray  # (d, d)

    @staticmethod
    def const(value: float, d: int) -> "Jet2":
        return Jet2(float(value), np.zeros(d), np.zeros((d, d)))

    @staticmethod
    def variable(index: int, point: np.ndarray) -> "Jet2":
        d = len(point)
        g = np.zeros(d)
        g[index - 1] = 1.0
        return Jet2(float(point[index - 1]), g, np.zeros((d, d)))

    def __add__(self, other: "Jet2") -> "Jet2":
        return Jet2(self.value + other.value, self.grad + other.grad, self.hess + other.hess)

    def __sub__(self, other: "Jet2") -> "Jet2":
        return Jet2(self.value - other.value, self.grad - other.grad, self.hess - other.hess)

    def __neg__(self) -> "Jet2":
        return Jet2(-self.value, -self.grad, -self.hess)

    def __mul__(self, other: "Jet2") -> "Jet2":
        # the symmetrized cross term is added as one matrix so the Hessian
        # stays exactly symmetric (float addition is commutative, not
        # associative)
        cross = np.outer(self.grad, other.grad)
        cross = cross + cross.T
        return Jet2(
            self.value * other.value,
            self.value * other.grad + other.value * self.grad,
            self.value * other.hess + other.value * self.hess + cross,
        )

    def _div(self, other: "Jet2") -> "Jet2":
        w = self.value / other.value
        grad = (self.grad - w * other.grad) / other.value
        cross = np.outer(grad, other.grad)
        cross = cross + cross.T
        hess = (self.hess - w * other.hess - cross) / other.value
        return Jet2(w, grad, hess)

    def chain(self, f0: float, f1: float, f2: float) -> "Jet2":
        """Jet of phi(self) given phi, phi', phi'' at self.value."""
        return Jet2(f0, f1 * self.grad, f1 * self.hess + f2 * np.outer(self.grad, self.grad))


def _jet_pow(u: Jet2, k: int, node: Expr) -> Jet2:
    if k == 0:
        return Jet2.const(1.0, len(u.grad))
    if k < 0:
        if u.value == 0.0:
            raise EvalDomainError("division by zero", to_source(node))
        return Jet2.const(1.0, len(u.grad))._div(_jet_pow(u, -k, node))
    # binary exponentiation keeps integer powers total on the whole line
    result: Jet2 | None = None
    base = u
    while k:
        if k & 1:
            result = base if result is None else result * base
        k >>= 1
        if k:
            base = base * base
    assert result is not None
    return result


def eval_jet2(e: Expr, p) -> Jet2:
    """Evaluate the 2-jet of ``e`` at the parameter point ``p``."""
    point = np.asarray(p, dtype=float)
    if point.ndim != 1:
        raise DimensionMismatch(
            f"parameter point must be a 1-d sequence, got shape {np.shape(point)}"
        )
    return _eval(e, point)


def _eval(e: Expr, p: np.ndarray) -> Jet2:
    if isinstance(e, Const):
        return Jet2.const(e.value, len(p))
    if isinstance(e, Var):
        if e.index > len(p):
            raise EvalDomainError(
                f"variable index {e.index} exceeds point dimension {len(p)}", to_source(e)
            )
        return Jet2.variable(e.index, p)
    if isinstance(e, Neg):
        return -_eval(e.arg, p)
    if isinstance(e, BinOp):
        a = _eval(e.lhs, p)
        b = _eval(e.rhs, p)
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        if b.value == 0.0:
            raise EvalDomainError("division by zero", to_source(e))
        return a._div(b)
    if isinstance(e, Pow):
        return _jet_pow(_eval(e.base, p), e.exponent, e)
    if isinstance(e, Fun):
        u = _eval(e.arg, p)
        v = u.value
        if e.name == "sin":
            return u.chain(math.sin(v), math.cos(v), -math.sin(v))
        if e.name == "cos":
            return u.chain(math.cos(v), -math.sin(v), -math.cos(v))
        if e.name == "sinh":
            return u.chain(math.sinh(v), math.cosh(v), math.sinh(v))
        if e.name == "cosh":
            return u.chain(math.cosh(v), math.sinh(v), math.cosh(v))
        if e.name == "exp":
            w = math.exp(v)
            return u.chain(w, w, w)
        if e.name == "ln":
            if v <= 0.0:
                raise EvalDomainError("logarithm of a nonpositive value", to_source(e))
            return u.chain(math.log(v), 1.0 / v, -1.0 / (v * v))
        if e.name == "sqrt":
            if v <= 0.0:
                raise EvalDomainError("square root of a nonpositive value", to_source(e))
            s = math.sqrt(v)
            return u.chain(s, 0.5 / s, -0.25 / (s * v))
        raise ValueError(f"unknown function {e.name!r}")
    raise TypeError(f"not an Expr: {e!r}")
