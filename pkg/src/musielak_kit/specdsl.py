"""A small expression language for functions of ``t`` and ``u``.

Grammar (whitespace-insensitive)::

    expr  := term (("+" | "-") term)*
    term  := unary (("*" | "/") unary)*
    unary := "-" unary | power
    power := atom ("^" unary)?
    atom  := number | ident | ident "(" expr ("," expr)* ")" | "(" expr ")"

``^`` is right-associative and binds tighter than unary minus, so ``-u^2``
is ``-(u^2)`` while ``2^-1`` is still accepted.  Functions are ``abs``,
``exp``, ``log`` (one argument) and ``max``, ``min`` (two or more).

Evaluation is vectorised over numpy arrays; domain problems are raised as
:class:`DomainError` instead of producing NaN.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Union

import numpy as np

from .errors import (
    DomainError,
    EvaluationOverflow,
    ExprSyntaxError,
    UnboundParameter,
    UnknownIdentifier,
)

VARIABLES = frozenset({"t", "u"})
FUNCTIONS = {"abs": (1, 1), "exp": (1, 1), "log": (1, 1), "max": (2, None), "min": (2, None)}


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


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
    exponent: "Expr"


@dataclass(frozen=True)
class Call:
    func: str
    args: tuple


Expr = Union[Const, Var, Neg, Add, Sub, Mul, Div, Pow, Call]

_BINARY = {"+": Add, "-": Sub, "*": Mul, "/": Div}
_SYMBOL = {Add: "+", Sub: "-", Mul: "*", Div: "/"}

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^(),])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Tok:
    kind: str  # "num", "ident", "op", "end"
    text: str
    pos: int  # character index


def _byte_offset(text: str, pos: int) -> int:
    return len(text[:pos].encode("utf-8"))


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ExprSyntaxError(
                f"unexpected character {text[pos]!r}",
                _byte_offset(text, pos),
                {"number", "identifier", "operator"},
                text,
            )
        kind = m.lastgroup
        if kind != "ws":
            toks.append(_Tok(kind, m.group(), pos))
        pos = m.end()
    toks.append(_Tok("end", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text: str, params: frozenset | None):
        self.text = text
        self.params = params
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def fail(self, message: str, expected, cls=ExprSyntaxError, tok: _Tok | None = None):
        tok = tok or self.tok
        raise cls(message, _byte_offset(self.text, tok.pos), expected, self.text)

    def accept(self, op: str) -> bool:
        if self.tok.kind == "op" and self.tok.text == op:
            self.i += 1
            return True
        return False

    def expect(self, op: str) -> None:
        if not self.accept(op):
            got = self.tok.text or "end of input"
            self.fail(f"expected {op!r}, got {got!r}", {op})

    def parse(self) -> Expr:
        node = self.expr()
        if self.tok.kind != "end":
            self.fail(f"unexpected {self.tok.text!r}", {"+", "-", "*", "/", "^", "end of input"})
        return node

    def expr(self) -> Expr:
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.tok.text
            self.i += 1
            node = _BINARY[op](node, self.term())
        return node

    def term(self) -> Expr:
        node = self.unary()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.tok.text
            self.i += 1
            node = _BINARY[op](node, self.unary())
        return node

    def unary(self) -> Expr:
        if self.accept("-"):
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.accept("^"):
            return Pow(base, self.unary())
        return base

    def atom(self) -> Expr:
        tok = self.tok
        if tok.kind == "num":
            self.i += 1
            value = float(tok.text)
            if not math.isfinite(value):
                self.fail(f"numeric literal {tok.text!r} is not finite", {"number"}, tok=tok)
            return Const(value)
        if tok.kind == "ident":
            self.i += 1
            name = tok.text
            if self.accept("("):
                if name not in FUNCTIONS:
                    self.fail(f"unknown function {name!r}", set(FUNCTIONS), UnknownIdentifier, tok)
                args = [self.expr()]
                while self.accept(","):
                    args.append(self.expr())
                self.expect(")")
                lo, hi = FUNCTIONS[name]
                if len(args) < lo or (hi is not None and len(args) > hi):
                    self.fail(f"{name} takes {lo}{'' if hi == lo else '+'} argument(s), got {len(args)}",
                              {"argument"}, tok=tok)
                return Call(name, tuple(args))
            if name in FUNCTIONS:
                self.fail(f"function {name!r} used without arguments", {"("})
            if name in VARIABLES:
                return Var(name)
            if self.params is not None and name not in self.params:
                allowed = set(VARIABLES) | set(self.params) | set(FUNCTIONS)
                self.fail(f"unknown identifier {name!r}", allowed, UnknownIdentifier, tok)
            return Var(name)
        if self.accept("("):
            node = self.expr()
            self.expect(")")
            return node
        got = tok.text or "end of input"
        self.fail(f"expected an operand, got {got!r}", {"number", "identifier", "(", "-"})


def parse(text: str, params: Iterable[str] | None = None) -> Expr:
    """Parse ``text`` into an expression tree.

    When ``params`` is given, identifiers other than ``t``, ``u``, those
    parameters and the built-in functions raise :class:`UnknownIdentifier`.
    With ``params=None`` every other name is taken to be a parameter.
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    declared = None if params is None else frozenset(params)
    return _Parser(text, declared).parse()


# -- printing ---------------------------------------------------------------

_PREC = {Add: 1, Sub: 1, Mul: 2, Div: 2, Neg: 3, Pow: 4}


def _fmt_number(x: float) -> str:
    if x == int(x) and abs(x) < 1e16:
        s = str(int(x))
    else:
        s = repr(x)
    return f"({s})" if x < 0 else s


def pretty(e: Expr) -> str:
    """Canonical text for ``e``; ``parse(pretty(e))`` rebuilds the same tree."""
    if isinstance(e, Const):
        return _fmt_number(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Call):
        return f"{e.func}({', '.join(pretty(a) for a in e.args)})"
    if isinstance(e, Neg):
        inner = pretty(e.arg)
        if _PREC.get(type(e.arg), 5) < _PREC[Neg]:
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(e, Pow):
        base = pretty(e.base)
        if _PREC.get(type(e.base), 5) <= _PREC[Pow] or (isinstance(e.base, Const) and e.base.value < 0):
            base = f"({base})"
        exponent = pretty(e.exponent)
        if _PREC.get(type(e.exponent), 5) < _PREC[Neg]:
            exponent = f"({exponent})"
        return f"{base}^{exponent}"
    prec = _PREC[type(e)]
    left, right = pretty(e.left), pretty(e.right)
    if _PREC.get(type(e.left), 5) < prec:
        left = f"({left})"
    # left-associative: an equal-precedence right child needs grouping
    if _PREC.get(type(e.right), 5) <= prec:
        right = f"({right})"
    return f"{left} {_SYMBOL[type(e)]} {right}"


def free_parameters(e: Expr) -> frozenset:
    """Names used in ``e`` other than ``t`` and ``u``."""
    if isinstance(e, Var):
        return frozenset() if e.name in VARIABLES else frozenset({e.name})
    if isinstance(e, Const):
        return frozenset()
    if isinstance(e, Neg):
        return free_parameters(e.arg)
    if isinstance(e, Pow):
        return free_parameters(e.base) | free_parameters(e.exponent)
    if isinstance(e, Call):
        return frozenset().union(*(free_parameters(a) for a in e.args))
    return free_parameters(e.left) | free_parameters(e.right)


# -- evaluation -------------------------------------------------------------


def _check(value, path, what):
    if not np.all(np.isfinite(value)):
        raise EvaluationOverflow(f"{what} produced a non-finite value", path)
    return value


def _eval(e, env, path):
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        try:
            return env[e.name]
        except KeyError:
            raise UnboundParameter(e.name) from None
    if isinstance(e, Neg):
        return -_eval(e.arg, env, path + (0,))
    if isinstance(e, Call):
        args = [_eval(a, env, path + (i,)) for i, a in enumerate(e.args)]
        if e.func == "abs":
            return np.abs(args[0])
        if e.func == "exp":
            return _check(np.exp(args[0]), path, "exp")
        if e.func == "log":
            x = np.asarray(args[0])
            if np.any(x <= 0):
                raise DomainError("log of a non-positive argument", path)
            return np.log(args[0])
        reduce = np.maximum if e.func == "max" else np.minimum
        out = args[0]
        for a in args[1:]:
            out = reduce(out, a)
        return out
    if isinstance(e, Pow):
        base = _eval(e.base, env, path + (0,))
        expo = _eval(e.exponent, env, path + (1,))
        b, x = np.broadcast_arrays(np.asarray(base, dtype=float), np.asarray(expo, dtype=float))
        if np.any((b < 0) & (x != np.round(x))):
            raise DomainError("negative base with non-integer exponent", path)
        if np.any((b == 0) & (x < 0)):
            raise DomainError("zero raised to a negative power", path)
        return _check(np.power(base, expo), path, "power")
    left = _eval(e.left, env, path + (0,))
    right = _eval(e.right, env, path + (1,))
    if isinstance(e, Add):
        return _check(left + right, path, "addition")
    if isinstance(e, Sub):
        return _check(left - right, path, "subtraction")
    if isinstance(e, Mul):
        return _check(left * right, path, "multiplication")
    if np.any(np.asarray(right) == 0):
        raise DomainError("division by zero", path)
    return _check(left / right, path, "division")


def evaluate(e: Expr, t=0.0, u=0.0, params: Mapping[str, float] | None = None):
    """Evaluate ``e`` at ``(t, u)``.

    ``t`` and ``u`` may be floats or numpy arrays (broadcast together).  A
    float is returned for scalar inputs.
    """
    env = dict(params or {})
    missing = free_parameters(e) - env.keys()
    if missing:
        raise UnboundParameter(", ".join(sorted(missing)))
    env["t"] = t
    env["u"] = u
    with np.errstate(all="ignore"):
        out = _eval(e, env, ())
    shape = np.broadcast(np.asarray(t), np.asarray(u)).shape
    if shape == ():
        return float(out)
    return np.broadcast_to(np.asarray(out, dtype=float), shape).copy()


# spec name for the operation; ``eval`` itself is left alone
eval_expr = evaluate
