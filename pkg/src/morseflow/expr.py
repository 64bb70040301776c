"""Smooth scalar expressions: parser, printer, evaluator and symbolic calculus.

Grammar (whitespace is insignificant)::

    expr   := term (('+' | '-') term)*
    term   := factor ('*' factor)*
    factor := '-' factor | atom ('^' uint)?
    atom   := number | 'x' uint | '(' expr ')' | func '(' expr ')'
    func   := 'exp' | 'sin' | 'cos'

There is no division and exponents are non-negative integers, so every
expression is an entire function on R^n.  Unary minus binds looser than
``^`` so that ``-x1^2`` reads as ``-(x1^2)``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import ExprSyntaxError

FUNCTIONS = ("exp", "sin", "cos")

_NP_FUNCS = {"exp": np.exp, "sin": np.sin, "cos": np.cos}
_MATH_FUNCS = {"exp": math.exp, "sin": math.sin, "cos": math.cos}


class Expr:
    """Base class of the immutable expression tree."""

    __slots__ = ()

    def children(self) -> tuple[Expr, ...]:
        return ()

    def __add__(self, other):
        return Sum((self, _coerce(other)))

    def __radd__(self, other):
        return Sum((_coerce(other), self))

    def __sub__(self, other):
        return Sum((self, Neg(_coerce(other))))

    def __mul__(self, other):
        return Product((self, _coerce(other)))

    def __rmul__(self, other):
        return Product((_coerce(other), self))

    def __neg__(self):
        return Neg(self)

    def __pow__(self, n: int):
        return Pow(self, n)

    def __str__(self):
        return to_string(self)


def _coerce(value) -> Expr:
    if isinstance(value, Expr):
        return value
    return Const(float(value))


@dataclass(frozen=True, eq=True)
class Const(Expr):
    value: float

    def __repr__(self):
        return f"Const({self.value!r})"


@dataclass(frozen=True, eq=True)
class Var(Expr):
    index: int  # 1-based coordinate index

    def __repr__(self):
        return f"Var({self.index})"


@dataclass(frozen=True, eq=True)
class Sum(Expr):
    terms: tuple[Expr, ...]

    def children(self):
        return self.terms

    def __repr__(self):
        return f"Sum({', '.join(map(repr, self.terms))})"


@dataclass(frozen=True, eq=True)
class Product(Expr):
    factors: tuple[Expr, ...]

    def children(self):
        return self.factors

    def __repr__(self):
        return f"Product({', '.join(map(repr, self.factors))})"


@dataclass(frozen=True, eq=True)
class Pow(Expr):
    base: Expr
    exponent: int

    def __post_init__(self):
        if not isinstance(self.exponent, int) or self.exponent < 0:
            raise ValueError(f"exponent must be a non-negative int, got {self.exponent!r}")

    def children(self):
        return (self.base,)

    def __repr__(self):
        return f"Pow({self.base!r}, {self.exponent})"


@dataclass(frozen=True, eq=True)
class Neg(Expr):
    arg: Expr

    def children(self):
        return (self.arg,)

    def __repr__(self):
        return f"Neg({self.arg!r})"


@dataclass(frozen=True, eq=True)
class Func(Expr):
    name: str
    arg: Expr

    def __post_init__(self):
        if self.name not in FUNCTIONS:
            raise ValueError(f"unknown function {self.name!r}")

    def children(self):
        return (self.arg,)

    def __repr__(self):
        return f"Func({self.name!r}, {self.arg!r})"


ZERO = Const(0.0)
ONE = Const(1.0)


# ---------------------------------------------------------------------------
# Parsing

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<var>x\d+)
  | (?P<func>exp|sin|cos)
  | (?P<op>[-+*^()])
    """,
    re.VERBOSE,
)


def _tokenize(source: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {source[pos]!r}", _byte_offset(source, pos))
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(), _byte_offset(source, pos)))
        pos = m.end()
    tokens.append(("end", "", _byte_offset(source, len(source))))
    return tokens


def _byte_offset(source: str, char_pos: int) -> int:
    return len(source[:char_pos].encode("utf-8"))


class _Parser:
    def __init__(self, source: str, dim: int):
        self.tokens = _tokenize(source)
        self.pos = 0
        self.dim = dim

    def peek(self):
        return self.tokens[self.pos]

    def take(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, text: str):
        kind, value, offset = self.take()
        if value != text:
            found = value or "end of input"
            raise ExprSyntaxError(f"expected {text!r}, found {found!r}", offset)

    def parse(self) -> Expr:
        e = self.expr()
        kind, value, offset = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected token {value!r}", offset)
        return e

    def expr(self) -> Expr:
        terms = [self.term()]
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            t = self.term()
            terms.append(t if op == "+" else Neg(t))
        return terms[0] if len(terms) == 1 else Sum(tuple(terms))

    def term(self) -> Expr:
        factors = [self.factor()]
        while self.peek()[1] == "*":
            self.take()
            factors.append(self.factor())
        return factors[0] if len(factors) == 1 else Product(tuple(factors))

    def factor(self) -> Expr:
        if self.peek()[1] == "-":
            self.take()
            return Neg(self.factor())
        base = self.atom()
        if self.peek()[1] == "^":
            self.take()
            kind, value, offset = self.take()
            if kind == "op" and value == "-":
                raise ExprSyntaxError("negative exponent", offset)
            if kind != "number":
                raise ExprSyntaxError("expected integer exponent", offset)
            if not value.isdigit():
                raise ExprSyntaxError(f"fractional exponent {value!r}", offset)
            return Pow(base, int(value))
        return base

    def atom(self) -> Expr:
        kind, value, offset = self.take()
        if kind == "number":
            return Const(float(value))
        if kind == "var":
            index = int(value[1:])
            if index < 1 or index > self.dim:
                raise ExprSyntaxError(f"variable {value} outside dimension {self.dim}", offset)
            return Var(index)
        if kind == "func":
            self.expect("(")
            arg = self.expr()
            self.expect(")")
            return Func(value, arg)
        if value == "(":
            e = self.expr()
            self.expect(")")
            return e
        raise ExprSyntaxError(f"unexpected {value or 'end of input'!r}", offset)


def parse(source: str, dim: int) -> Expr:
    """Parse ``source`` into an expression over the variables ``x1..x{dim}``.

    Raises
    ------
    ExprSyntaxError
        On malformed input, out-of-range variables, or exponents that are
        not non-negative integers.  ``offset`` points into the UTF-8 bytes.
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    return _Parser(source, dim).parse()


# ---------------------------------------------------------------------------
# Printing


def _format_number(v: float) -> str:
    if v == int(v) and abs(v) < 1e16:
        return str(int(v))
    return repr(float(v))


def to_string(e: Expr) -> str:
    """Canonical fully parenthesized infix form; re-parses to an equal printout."""
    if isinstance(e, Const):
        s = _format_number(abs(e.value)) if e.value < 0 else _format_number(e.value)
        return f"(-{s})" if e.value < 0 else s
    if isinstance(e, Var):
        return f"x{e.index}"
    if isinstance(e, Sum):
        return "(" + " + ".join(to_string(t) for t in e.terms) + ")"
    if isinstance(e, Product):
        return "(" + " * ".join(to_string(t) for t in e.factors) + ")"
    if isinstance(e, Pow):
        return f"({to_string(e.base)}^{e.exponent})"
    if isinstance(e, Neg):
        return f"(-{to_string(e.arg)})"
    if isinstance(e, Func):
        return f"{e.name}({to_string(e.arg)})"
    raise TypeError(f"not an expression: {e!r}")


# ---------------------------------------------------------------------------
# Evaluation


def evaluate(e: Expr, x) -> float | np.ndarray:
    """Evaluate ``e`` at ``x`` by direct recursion.

    ``x`` is a point of shape ``(dim,)`` or a batch of shape ``(..., dim)``.
    Overflow propagates as ``inf``.
    """
    x = np.asarray(x, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        out = _eval(e, x)
    out = np.broadcast_to(out, x.shape[:-1])
    return float(out) if out.ndim == 0 else np.array(out)


def _eval(e: Expr, x: np.ndarray):
    if isinstance(e, Const):
        return np.float64(e.value)
    if isinstance(e, Var):
        return x[..., e.index - 1]
    if isinstance(e, Sum):
        acc = _eval(e.terms[0], x)
        for t in e.terms[1:]:
            acc = acc + _eval(t, x)
        return acc
    if isinstance(e, Product):
        acc = _eval(e.factors[0], x)
        for t in e.factors[1:]:
            acc = acc * _eval(t, x)
        return acc
    if isinstance(e, Pow):
        return _eval(e.base, x) ** e.exponent
    if isinstance(e, Neg):
        return -_eval(e.arg, x)
    if isinstance(e, Func):
        return _NP_FUNCS[e.name](_eval(e.arg, x))
    raise TypeError(f"not an expression: {e!r}")


def _codegen(e: Expr) -> str:
    if isinstance(e, Const):
        return f"({float(e.value)!r})"
    if isinstance(e, Var):
        return f"x[..., {e.index - 1}]"
    if isinstance(e, Sum):
        return "(" + " + ".join(_codegen(t) for t in e.terms) + ")"
    if isinstance(e, Product):
        return "(" + " * ".join(_codegen(t) for t in e.factors) + ")"
    if isinstance(e, Pow):
        return f"({_codegen(e.base)} ** {e.exponent})"
    if isinstance(e, Neg):
        return f"(-{_codegen(e.arg)})"
    if isinstance(e, Func):
        return f"_np.{e.name}({_codegen(e.arg)})"
    raise TypeError(f"not an expression: {e!r}")


def compile_exprs(exprs: Sequence[Expr], shape: tuple[int, ...] = ()) -> Callable:
    """Compile expressions into one vectorized numpy function.

    The returned callable maps an array ``x`` of shape ``(..., dim)`` to an
    array of shape ``x.shape[:-1] + shape`` whose flattened trailing block
    holds ``exprs`` in row-major order.  An empty ``shape`` requires exactly
    one expression and yields a scalar per point.
    """
    n = int(np.prod(shape)) if shape else 1
    if len(exprs) != n:
        raise ValueError(f"expected {n} expressions for shape {shape}, got {len(exprs)}")
    lines = ["def _compiled(x):", "    x = _np.asarray(x, dtype=float)"]
    lines.append(f"    out = _np.empty(x.shape[:-1] + {tuple(shape)!r})")
    lines.append("    flat = out.reshape(x.shape[:-1] + (-1,))" if shape else "    flat = out[..., None]")
    lines.append("    with _np.errstate(over='ignore', invalid='ignore'):")
    for k, e in enumerate(exprs):
        lines.append(f"        flat[..., {k}] = {_codegen(e)}")
    lines.append("    return out if out.ndim else float(out)")
    namespace = {"_np": np}
    exec("\n".join(lines), namespace)
    return namespace["_compiled"]


def _codegen_scalar(e: Expr) -> str:
    if isinstance(e, Const):
        return f"({float(e.value)!r})"
    if isinstance(e, Var):
        return f"x{e.index}"
    if isinstance(e, Sum):
        return "(" + " + ".join(_codegen_scalar(t) for t in e.terms) + ")"
    if isinstance(e, Product):
        return "(" + " * ".join(_codegen_scalar(t) for t in e.factors) + ")"
    if isinstance(e, Pow):
        return f"({_codegen_scalar(e.base)} ** {e.exponent})"
    if isinstance(e, Neg):
        return f"(-{_codegen_scalar(e.arg)})"
    if isinstance(e, Func):
        return f"_m.{e.name}({_codegen_scalar(e.arg)})"
    raise TypeError(f"not an expression: {e!r}")


def compile_scalar(exprs: Sequence[Expr], dim: int) -> Callable:
    """Compile expressions into a fast single-point function on Python floats.

    The callable takes a length-``dim`` sequence and returns a list of
    floats.  Overflow yields ``inf`` entries instead of raising.
    """
    args = ", ".join(f"x{i}" for i in range(1, dim + 1))
    body = ", ".join(_codegen_scalar(e) for e in exprs)
    src = (f"def _compiled(x):\n"
           f"    {args}, = map(float, x)\n"
           f"    try:\n"
           f"        return [{body}]\n"
           f"    except (OverflowError, ValueError):\n"
           f"        return [_inf] * {len(exprs)}\n")
    namespace = {"_m": math, "_inf": math.inf}
    exec(src, namespace)
    return namespace["_compiled"]


# ---------------------------------------------------------------------------
# Symbolic calculus


def differentiate(e: Expr, i: int) -> Expr:
    """Partial derivative with respect to ``x{i}``, simplified."""
    return simplify(_diff(e, i))


def _diff(e: Expr, i: int) -> Expr:
    if isinstance(e, Const):
        return ZERO
    if isinstance(e, Var):
        return ONE if e.index == i else ZERO
    if isinstance(e, Sum):
        return Sum(tuple(_diff(t, i) for t in e.terms))
    if isinstance(e, Product):
        terms = []
        for k in range(len(e.factors)):
            fs = list(e.factors)
            fs[k] = _diff(fs[k], i)
            terms.append(Product(tuple(fs)))
        return Sum(tuple(terms))
    if isinstance(e, Pow):
        if e.exponent == 0:
            return ZERO
        return Product((Const(float(e.exponent)), Pow(e.base, e.exponent - 1), _diff(e.base, i)))
    if isinstance(e, Neg):
        return Neg(_diff(e.arg, i))
    if isinstance(e, Func):
        du = _diff(e.arg, i)
        if e.name == "exp":
            outer = e
        elif e.name == "sin":
            outer = Func("cos", e.arg)
        else:
            outer = Neg(Func("sin", e.arg))
        return Product((outer, du))
    raise TypeError(f"not an expression: {e!r}")


def simplify(e: Expr) -> Expr:
    """Local rewriting: identities, annihilators, flattening, constant folding.

    Works bottom-up; each node is normalized once its children are, which
    makes the result a fixed point of ``simplify``.
    """
    if isinstance(e, (Const, Var)):
        return e
    if isinstance(e, Sum):
        return _simplify_sum([simplify(t) for t in e.terms])
    if isinstance(e, Product):
        return _simplify_product([simplify(t) for t in e.factors])
    if isinstance(e, Pow):
        base = simplify(e.base)
        if e.exponent == 0:
            return ONE
        if e.exponent == 1:
            return base
        if isinstance(base, Const):
            return _fold(base.value ** e.exponent)
        return Pow(base, e.exponent)
    if isinstance(e, Neg):
        arg = simplify(e.arg)
        if isinstance(arg, Const):
            return _fold(-arg.value)
        if isinstance(arg, Neg):
            return arg.arg
        return Neg(arg)
    if isinstance(e, Func):
        arg = simplify(e.arg)
        if isinstance(arg, Const):
            return _fold(_MATH_FUNCS[e.name](arg.value))
        return Func(e.name, arg)
    raise TypeError(f"not an expression: {e!r}")


def _fold(v: float) -> Const:
    # normalize -0.0 so structurally equal trees print identically
    return Const(float(v) + 0.0)


def _simplify_sum(terms: list[Expr]) -> Expr:
    flat: list[Expr] = []
    for t in terms:
        flat.extend(t.terms if isinstance(t, Sum) else (t,))
    const = 0.0
    rest = []
    for t in flat:
        if isinstance(t, Const):
            const += t.value
        else:
            rest.append(t)
    if const != 0.0:
        rest.append(_fold(const))
    if not rest:
        return ZERO
    if len(rest) == 1:
        return rest[0]
    return Sum(tuple(rest))


def _simplify_product(factors: list[Expr]) -> Expr:
    flat: list[Expr] = []
    for t in factors:
        flat.extend(t.factors if isinstance(t, Product) else (t,))
    const = 1.0
    rest = []
    for t in flat:
        if isinstance(t, Const):
            const *= t.value
        else:
            rest.append(t)
    if const == 0.0:
        return ZERO
    if const != 1.0:
        rest.insert(0, _fold(const))
    if not rest:
        return ONE
    if len(rest) == 1:
        return rest[0]
    return Product(tuple(rest))


def max_variable(e: Expr) -> int:
    """Largest variable index occurring in ``e`` (0 for constants)."""
    if isinstance(e, Var):
        return e.index
    return max((max_variable(c) for c in e.children()), default=0)


def substitute_linear(e: Expr, matrix) -> Expr:
    """Change of variables ``x -> A x``: replace ``x{i}`` by ``sum_j A[i-1, j-1] x{j}``."""
    a = np.asarray(matrix, dtype=float)

    def go(node):
        if isinstance(node, Var):
            row = a[node.index - 1]
            return Sum(tuple(Product((Const(float(c)), Var(j + 1))) for j, c in enumerate(row)))
        if isinstance(node, Const):
            return node
        if isinstance(node, Sum):
            return Sum(tuple(go(t) for t in node.terms))
        if isinstance(node, Product):
            return Product(tuple(go(t) for t in node.factors))
        if isinstance(node, Pow):
            return Pow(go(node.base), node.exponent)
        if isinstance(node, Neg):
            return Neg(go(node.arg))
        return Func(node.name, go(node.arg))

    return simplify(go(e))
