"""A small arithmetic-expression language with symbolic differentiation.

Grammar (``^`` is right associative and binds tighter than unary minus)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('-' | '+') unary | power
    power  := atom ('^' unary)?
    atom   := NUMBER | NAME | NAME '(' expr ')' | '(' expr ')'

Functions: exp, log, sin, cos, sqrt, abs. Constants: pi, e.
Expressions evaluate elementwise on numpy arrays.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

__all__ = ["Expression", "ExpressionError", "parse"]


class ExpressionError(ValueError):
    pass


_TOKEN = re.compile(r"\s*(?:(\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)|([A-Za-z_]\w*)|(\*\*|[-+*/^()]))")
_CONSTANTS = {"pi": math.pi, "e": math.e}
_FUNCS = {"exp", "log", "sin", "cos", "sqrt", "abs"}

# AST nodes are tuples: ("num", v) ("var", name) ("neg", a) ("add"|"sub"|"mul"|"div"|"pow", a, b) ("call", f, a)


def _tokenize(text):
    pos, out = 0, []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ExpressionError(f"unexpected character {text[pos:].strip()[:1]!r} in {text!r}")
        num, name, op = m.groups()
        if num is not None:
            out.append(("num", float(num)))
        elif name is not None:
            out.append(("name", name))
        else:
            out.append(("op", "^" if op == "**" else op))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, tokens, variables):
        self.toks = tokens
        self.i = 0
        self.vars = variables

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None)

    def take(self, op=None):
        tok = self.peek()
        if op is not None and tok != ("op", op):
            raise ExpressionError(f"expected {op!r}, got {tok[1]!r}")
        self.i += 1
        return tok

    def expr(self):
        node = self.term()
        while self.peek() in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            node = ("add" if op == "+" else "sub", node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek() in (("op", "*"), ("op", "/")):
            op = self.take()[1]
            node = ("mul" if op == "*" else "div", node, self.unary())
        return node

    def unary(self):
        if self.peek() == ("op", "-"):
            self.take()
            return ("neg", self.unary())
        if self.peek() == ("op", "+"):
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek() == ("op", "^"):
            self.take()
            return ("pow", base, self.unary())
        return base

    def atom(self):
        kind, val = self.peek()
        if kind == "num":
            self.take()
            return ("num", val)
        if kind == "name":
            self.take()
            if self.peek() == ("op", "("):
                if val not in _FUNCS:
                    raise ExpressionError(f"unknown function {val!r}")
                self.take("(")
                arg = self.expr()
                self.take(")")
                return ("call", val, arg)
            if val in self.vars:
                return ("var", val)
            if val in _CONSTANTS:
                return ("num", _CONSTANTS[val])
            raise ExpressionError(f"unknown name {val!r}; allowed variables: {', '.join(sorted(self.vars))}")
        if (kind, val) == ("op", "("):
            self.take()
            node = self.expr()
            self.take(")")
            return node
        raise ExpressionError(f"unexpected token {val!r}" if kind else "unexpected end of expression")


# -- simplifying constructors ------------------------------------------------

_ZERO, _ONE = ("num", 0.0), ("num", 1.0)


def _is(node, v):
    return node[0] == "num" and node[1] == v


def _add(a, b):
    if _is(a, 0.0):
        return b
    if _is(b, 0.0):
        return a
    if a[0] == b[0] == "num":
        return ("num", a[1] + b[1])
    return ("add", a, b)


def _sub(a, b):
    if _is(b, 0.0):
        return a
    if _is(a, 0.0):
        return _neg(b)
    if a[0] == b[0] == "num":
        return ("num", a[1] - b[1])
    return ("sub", a, b)


def _neg(a):
    if a[0] == "num":
        return ("num", -a[1])
    if a[0] == "neg":
        return a[1]
    return ("neg", a)


def _mul(a, b):
    if _is(a, 0.0) or _is(b, 0.0):
        return _ZERO
    if _is(a, 1.0):
        return b
    if _is(b, 1.0):
        return a
    if a[0] == b[0] == "num":
        return ("num", a[1] * b[1])
    return ("mul", a, b)


def _div(a, b):
    if _is(a, 0.0):
        return _ZERO
    if _is(b, 1.0):
        return a
    return ("div", a, b)


def _pow(a, b):
    if _is(b, 0.0):
        return _ONE
    if _is(b, 1.0):
        return a
    return ("pow", a, b)


def _contains(node, var):
    tag = node[0]
    if tag == "var":
        return node[1] == var
    if tag == "num":
        return False
    return any(_contains(c, var) for c in node[1:] if isinstance(c, tuple))


def _diff(node, var):
    tag = node[0]
    if tag == "num":
        return _ZERO
    if tag == "var":
        return _ONE if node[1] == var else _ZERO
    if tag == "neg":
        return _neg(_diff(node[1], var))
    if tag in ("add", "sub"):
        f = _add if tag == "add" else _sub
        return f(_diff(node[1], var), _diff(node[2], var))
    if tag == "mul":
        a, b = node[1:]
        return _add(_mul(_diff(a, var), b), _mul(a, _diff(b, var)))
    if tag == "div":
        a, b = node[1:]
        return _div(_sub(_mul(_diff(a, var), b), _mul(a, _diff(b, var))), _pow(b, ("num", 2.0)))
    if tag == "pow":
        a, b = node[1:]
        if not _contains(b, var):
            # d(a^c) = c a^(c-1) a'
            return _mul(_mul(b, _pow(a, _sub(b, _ONE))), _diff(a, var))
        # general case a^b = exp(b log a)
        return _mul(node, _add(_mul(_diff(b, var), ("call", "log", a)), _mul(b, _div(_diff(a, var), a))))
    if tag == "call":
        f, a = node[1], node[2]
        da = _diff(a, var)
        outer = {
            "exp": lambda: node,
            "log": lambda: _div(_ONE, a),
            "sin": lambda: ("call", "cos", a),
            "cos": lambda: _neg(("call", "sin", a)),
            "sqrt": lambda: _div(("num", 0.5), node),
            "abs": lambda: ("call", "sign", a),
        }[f]()
        return _mul(outer, da)
    raise ExpressionError(f"cannot differentiate node {tag}")


_NUMPY = {"exp": np.exp, "log": np.log, "sin": np.sin, "cos": np.cos, "sqrt": np.sqrt, "abs": np.abs, "sign": np.sign}


def _eval(node, env):
    tag = node[0]
    if tag == "num":
        return node[1]
    if tag == "var":
        return env[node[1]]
    if tag == "neg":
        return -_eval(node[1], env)
    if tag == "call":
        return _NUMPY[node[1]](_eval(node[2], env))
    a, b = _eval(node[1], env), _eval(node[2], env)
    if tag == "add":
        return a + b
    if tag == "sub":
        return a - b
    if tag == "mul":
        return a * b
    if tag == "div":
        return a / b
    return np.power(a, b)


def _fmt(node):
    tag = node[0]
    if tag == "num":
        return repr(node[1])
    if tag == "var":
        return node[1]
    if tag == "neg":
        return f"(-{_fmt(node[1])})"
    if tag == "call":
        return f"{node[1]}({_fmt(node[2])})"
    sym = {"add": "+", "sub": "-", "mul": "*", "div": "/", "pow": "^"}[tag]
    return f"({_fmt(node[1])} {sym} {_fmt(node[2])})"


@dataclass(frozen=True)
class Expression:
    """A parsed expression in a fixed set of variables."""

    source: str
    variables: tuple
    tree: tuple

    def __call__(self, **values):
        missing = set(self.variables) - values.keys()
        if missing:
            raise ExpressionError(f"missing values for {sorted(missing)}")
        with np.errstate(all="ignore"):
            out = _eval(self.tree, {k: np.asarray(v, dtype=float) for k, v in values.items()})
        shape = np.broadcast_shapes(*(np.shape(values[v]) for v in self.variables)) if self.variables else ()
        return np.broadcast_to(np.asarray(out, dtype=float), shape).copy() if shape else float(out)

    def diff(self, var: str) -> "Expression":
        if var not in self.variables:
            raise ExpressionError(f"{var!r} is not a variable of this expression")
        tree = _diff(self.tree, var)
        return Expression(f"d/d{var}[{self.source}]", self.variables, tree)

    def depends_on(self, var: str) -> bool:
        return _contains(self.tree, var)

    def __str__(self):
        return _fmt(self.tree)


def parse(text: str, variables=("x", "y", "t")) -> Expression:
    """Parse ``text``; only the listed variable names may appear."""
    if not isinstance(text, str) or not text.strip():
        raise ExpressionError("empty expression")
    p = _Parser(_tokenize(text), set(variables))
    tree = p.expr()
    if p.i != len(p.toks):
        raise ExpressionError(f"trailing input after position {p.i} in {text!r}")
    return Expression(text, tuple(variables), tree)
