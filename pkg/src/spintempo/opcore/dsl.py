"""Operator DSL: parser and canonical printer.

Grammar (EBNF)::

    expr     = term { ("+" | "-") term } ;
    term     = unary { ("*" | "@" | "/") unary } ;
    unary    = ("-" | "+") unary | power ;
    power    = primary [ "^" [ "-" ] INT ] ;
    primary  = INT
             | "(" expr ")"
             | "sum" "[" NAME { "," NAME } "]" "(" expr ")"
             | NAME [ "(" arg { "," arg } ")" ] ;
    arg      = INT | NAME | expr ;          (* D's second argument is an expr *)

Atoms: ``phi g1 g2 g3 h11..h33 h d1 d2 d3 p1 p2 p3 beta gamma5 alpha1..alpha3
sigma1..sigma3 m i x1 x2 x3``; ``p^2`` is the squared momentum.  Indexed
forms: ``g(j) h(i,j) d(j) p(j) x(j) alpha(j) sigma(j) eps(i,j,k) delta(i,j)``
and ``D(j, F)`` for the derivative of a field expression ``F``.  ``*`` and
``@`` both mean operator composition.  ``#`` starts a comment.

``sum[i,j](...)`` sums its body over every index in 1..3.  Indices bound by a
sum (or passed in ``bindings``) may only appear as arguments of indexed forms.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Mapping

from . import dirac
from .coeff import GaussQ, I
from .expr import (
    DEFAULT_WINDOW,
    NO_DERIV,
    OperatorExpr,
    TermKey,
    Window,
    coord_op,
    deriv_op,
    field,
    field_op,
    mass,
    matrix_op,
    metric_h,
    momentum,
    momentum_squared,
    scalar,
)


class DSLError(ValueError):
    """Parse or evaluation error with a source position."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"line {line}, column {col}: {message}")
        self.message = message
        self.line = line
        self.col = col


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


_TOKEN_RE = re.compile(r"\s+|#[^\n]*|(?P<num>\d+)|(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[-+*/^@()\[\],])")


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos = 0
    line, line_start = 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise DSLError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind:
            toks.append(_Tok(kind, m.group(), line, pos - line_start + 1))
        chunk = m.group()
        nl = chunk.count("\n")
        if nl:
            line += nl
            line_start = pos + chunk.rfind("\n") + 1
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


# AST nodes are tuples: (kind, tok, *payload)

class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.k = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.k]

    def error(self, msg, tok=None):
        tok = tok or self.tok
        return DSLError(msg, tok.line, tok.col)

    def accept(self, text):
        if self.tok.kind == "op" and self.tok.text == text:
            self.k += 1
            return True
        return False

    def expect(self, text):
        if not self.accept(text):
            found = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")

    def parse(self):
        node = self.expr()
        if self.tok.kind != "eof":
            raise self.error(f"unexpected {self.tok.text!r}")
        return node

    def expr(self):
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            tok = self.tok
            self.k += 1
            node = ("add" if tok.text == "+" else "sub", tok, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.tok.kind == "op" and self.tok.text in "*@/":
            tok = self.tok
            self.k += 1
            node = ("div" if tok.text == "/" else "mul", tok, node, self.unary())
        return node

    def unary(self):
        tok = self.tok
        if self.accept("-"):
            return ("neg", tok, self.unary())
        if self.accept("+"):
            return self.unary()
        return self.power()

    def power(self):
        node = self.primary()
        tok = self.tok
        if self.accept("^"):
            sign = -1 if self.accept("-") else 1
            if self.tok.kind != "num":
                raise self.error("exponent must be an integer")
            n = sign * int(self.tok.text)
            self.k += 1
            node = ("pow", tok, node, n)
        return node

    def primary(self):
        tok = self.tok
        if tok.kind == "num":
            self.k += 1
            return ("num", tok, int(tok.text))
        if self.accept("("):
            node = self.expr()
            self.expect(")")
            return node
        if tok.kind == "name":
            self.k += 1
            if tok.text == "sum" and self.tok.text == "[":
                self.expect("[")
                names = [self._name()]
                while self.accept(","):
                    names.append(self._name())
                self.expect("]")
                self.expect("(")
                body = self.expr()
                self.expect(")")
                return ("sum", tok, tuple(names), body)
            if self.accept("("):
                args = [self.expr()]
                while self.accept(","):
                    args.append(self.expr())
                self.expect(")")
                return ("call", tok, tok.text, tuple(args))
            return ("name", tok, tok.text)
        found = tok.text or "end of input"
        raise self.error(f"unexpected {found!r}")

    def _name(self):
        if self.tok.kind != "name":
            raise self.error("expected an index name")
        name = self.tok.text
        self.k += 1
        return name


_SIMPLE_FIELDS = {"phi", "g1", "g2", "g3", "h"} | {f"h{a}{b}" for a in "123" for b in "123"}


class _Evaluator:
    def __init__(self, window: Window):
        self.w = window

    def err(self, msg, tok):
        return DSLError(msg, tok.line, tok.col)

    def index(self, node, env) -> int:
        kind, tok = node[0], node[1]
        if kind == "num":
            v = node[2]
        elif kind == "name" and node[2] in env:
            v = env[node[2]]
        else:
            raise self.err("index argument must be 1, 2, 3 or a bound index name", tok)
        if v not in (1, 2, 3):
            raise self.err(f"index out of range: {v}", tok)
        return v

    def eval(self, node, env) -> OperatorExpr:
        kind, tok = node[0], node[1]
        w = self.w
        if kind == "num":
            return scalar(node[2], w)
        if kind == "add":
            return self.eval(node[2], env) + self.eval(node[3], env)
        if kind == "sub":
            return self.eval(node[2], env) - self.eval(node[3], env)
        if kind == "neg":
            return -self.eval(node[2], env)
        if kind == "mul":
            return self.product(self.eval(node[2], env), self.eval(node[3], env), tok)
        if kind == "div":
            num = self.eval(node[2], env)
            den = self.eval(node[3], env)
            return self.product(num, self.invert(den, node[3][1]), tok)
        if kind == "pow":
            return self.power(node, env)
        if kind == "sum":
            names = node[2]
            clash = [n for n in names if n in env]
            if clash:
                raise self.err(f"index {clash[0]!r} is already bound", tok)
            out = scalar(0, w)
            for values in product((1, 2, 3), repeat=len(names)):
                out = out + self.eval(node[3], {**env, **dict(zip(names, values))})
            return out
        if kind == "name":
            return self.atom(node[2], tok, env)
        if kind == "call":
            return self.call(node, env)
        raise AssertionError(kind)

    def product(self, a: OperatorExpr, b: OperatorExpr, tok) -> OperatorExpr:
        """Compose, rejecting products that lie wholly outside the window.

        Partial truncation is the intended grading; a product whose every
        term is dropped (``phi*h12``, ``m^-2/m``) is almost surely a mistake.
        """
        if a and b:
            hdeg = min(len(k.fields) for k in a.keys()) + min(len(k.fields) for k in b.keys())
            if hdeg > self.w.max_hdeg:
                raise self.err(f"h-degree {hdeg} is outside the truncation window (max {self.w.max_hdeg})", tok)
            mpow = max(k.mpow for k in a.keys()) + max(k.mpow for k in b.keys())
            if mpow < self.w.min_mpow:
                raise self.err(f"m-power {mpow} is outside the truncation window [{self.w.min_mpow}, 1]", tok)
        return a * b

    def invert(self, e: OperatorExpr, tok) -> OperatorExpr:
        items = e.items()
        if len(items) != 1:
            raise self.err("can only divide by a nonzero number times a power of m", tok)
        key, c = items[0]
        if key.fields or key.matrix != dirac.IDENTITY or key.derivs != NO_DERIV or key.coords != NO_DERIV:
            raise self.err("can only divide by a nonzero number times a power of m", tok)
        inv = TermKey(-key.mpow, NO_DERIV, (), dirac.IDENTITY, NO_DERIV)
        self._check_mpow(-key.mpow, tok)
        return OperatorExpr({inv: GaussQ(1) / c}, self.w)

    def _check_mpow(self, k, tok):
        if k > 1 or k < self.w.min_mpow:
            raise self.err(f"m-power {k} is outside the truncation window [{self.w.min_mpow}, 1]", tok)

    def power(self, node, env):
        base, n = node[2], node[3]
        tok = node[1]
        if base[0] == "name" and base[2] == "p" and "p" not in env:
            if n != 2:
                raise self.err("the bare momentum vector only appears as p^2", tok)
            return momentum_squared(self.w)
        if base[0] == "name" and base[2] == "m" and "m" not in env:
            if n < self.w.min_mpow:
                raise self.err(f"m-power {n} is outside the truncation window [{self.w.min_mpow}, 1]", tok)
            return mass(n, self.w)
        value = self.eval(base, env)
        if n < 0:
            value = self.invert(value, tok)
            n = -n
        out = scalar(1, self.w)
        for _ in range(n):
            out = self.product(out, value, tok)
        return out

    def atom(self, name, tok, env):
        w = self.w
        if name in env:
            raise self.err(f"index {name!r} used as an operator", tok)
        if name in _SIMPLE_FIELDS:
            return field_op(field(name), w)
        if name == "m":
            return mass(1, w)
        if name == "i":
            return scalar(I, w)
        if name in ("beta", "gamma5"):
            return matrix_op(name, w)
        if name == "p":
            raise self.err("the bare momentum vector only appears as p^2", tok)
        m = re.fullmatch(r"(d|p|x|alpha|sigma)([123])", name)
        if m:
            return self._indexed(m.group(1), int(m.group(2)))
        raise self.err(f"unknown symbol {name!r}", tok)

    def _indexed(self, head, j):
        w = self.w
        if head == "d":
            return deriv_op(j, window=w)
        if head == "p":
            return momentum(j, w)
        if head == "x":
            return coord_op(j, w)
        if head == "alpha":
            return matrix_op(dirac.ALPHA[j], w)
        if head == "sigma":
            return matrix_op(dirac.SIGMA[j], w)
        if head == "g":
            return field_op(field(f"g{j}"), w)
        raise AssertionError(head)

    def call(self, node, env):
        _, tok, head, args = node
        w = self.w
        if head == "D":
            if len(args) != 2:
                raise self.err("D takes (axis, field)", tok)
            axis = self.index(args[0], env)
            inner = self.eval(args[1], env)
            return self.differentiate(inner, axis, args[1][1])
        ints = [self.index(a, env) for a in args]
        if head in ("g", "d", "p", "x", "alpha", "sigma"):
            if len(ints) != 1:
                raise self.err(f"{head} takes one index", tok)
            return self._indexed(head, ints[0])
        if head == "h":
            if len(ints) != 2:
                raise self.err("h takes two indices", tok)
            return field_op(field(metric_h(*ints)), w)
        if head == "eps":
            if len(ints) != 3:
                raise self.err("eps takes three indices", tok)
            a, b, c = ints
            return scalar((a - b) * (b - c) * (c - a) // 2, w)
        if head == "delta":
            if len(ints) != 2:
                raise self.err("delta takes two indices", tok)
            return scalar(int(ints[0] == ints[1]), w)
        raise self.err(f"unknown function {head!r}", tok)

    def differentiate(self, e: OperatorExpr, axis: int, tok) -> OperatorExpr:
        out = {}
        for key, c in e.items():
            if key.matrix != dirac.IDENTITY or key.derivs != NO_DERIV or key.coords != NO_DERIV or key.mpow:
                raise self.err("D(j, F) needs F built from fields and numbers only", tok)
            if not key.fields:
                continue
            for k in range(len(key.fields)):
                fs = list(key.fields)
                fs[k] = fs[k].differentiate(axis)
                k2 = TermKey(0, NO_DERIV, tuple(sorted(fs)), dirac.IDENTITY, NO_DERIV)
                out[k2] = out.get(k2, GaussQ(0)) + c
        return OperatorExpr(out, self.w)


def parse_operator(text: str, bindings: Mapping[str, int] | None = None, window: Window = DEFAULT_WINDOW) -> OperatorExpr:
    """Parse DSL text into a canonical expression.

    ``bindings`` fixes free index names, e.g. ``{"i": 1}`` for a component of
    a vector-valued formula.
    """
    node = _Parser(text).parse()
    out = _Evaluator(window).eval(node, dict(bindings or {}))
    high = [k.mpow for k in out.keys() if k.mpow > 1]
    if high:
        raise DSLError(f"m-power {max(high)} is above the truncation window (max 1)", 1, 1)
    return out


# -- printing --------------------------------------------------------------------

def _coeff_text(c: GaussQ) -> str:
    if not c.im:
        return str(c.re)
    if not c.re:
        if c.im == 1:
            return "i"
        if c.im == -1:
            return "-i"
        return f"{c.im}*i"
    sign = "+" if c.im > 0 else "-"
    mag = abs(c.im)
    im = "i" if mag == 1 else f"{mag}*i"
    return f"({c.re}{sign}{im})"


def _power(name, n):
    return name if n == 1 else f"{name}^{n}"


def term_text(key: TermKey, c: GaussQ) -> str:
    factors = []
    if key.mpow:
        factors.append(_power("m", key.mpow))
    for axis in (1, 2, 3):
        if key.coords[axis - 1]:
            factors.append(_power(f"x{axis}", key.coords[axis - 1]))
    factors.extend(str(f) for f in key.fields)
    if key.matrix != dirac.IDENTITY:
        factors.append(dirac.NAMES[key.matrix])
    for axis in (1, 2, 3):
        if key.derivs[axis - 1]:
            factors.append(_power(f"d{axis}", key.derivs[axis - 1]))
    body = "*".join(factors)
    coeff = _coeff_text(c)
    if not body:
        return coeff
    if coeff == "1":
        return body
    if coeff == "-1":
        return "-" + body
    return f"{coeff}*{body}"


def to_dsl(e: OperatorExpr) -> str:
    """Canonical DSL text; ``parse_operator(to_dsl(e)) == e``."""
    parts = []
    for key, c in e.items():
        text = term_text(key, c)
        if not parts:
            parts.append(text)
        elif text.startswith("-"):
            parts.append(" - " + text[1:])
        else:
            parts.append(" + " + text)
    return "".join(parts) if parts else "0"
