"""Tokenizer and recursive-descent parser for the infix expression language.

The grammar is deliberately small::

    expr  := term (('+' | '-') term)*
    term  := unary (('*' | '/') unary)*
    unary := ('+' | '-') unary | power
    power := atom (('^' | '**') unary)?
    atom  := INT | DECIMAL | NAME | NAME '(' expr (',' expr)* ')' | '(' expr ')'

Both ``^`` and ``**`` denote exponentiation. Parsing yields a tuple tree that
the callers lower either to exact rational functions or to float callables.
Decimal literals and function calls are only accepted when the caller asks
for them (numeric models of generators).
"""

from __future__ import annotations

import math
import re
from fractions import Fraction

from .errors import ExprSyntaxError

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+\.\d*|\.\d+|\d+)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>\*\*|[-+*/^(),]))"
)


def tokenize(text):
    tokens = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            col = pos + 1
            while col <= len(text) and text[col - 1].isspace():
                col += 1
            raise ExprSyntaxError("unexpected character", text, col)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start + 1))
        pos = m.end()
    tokens.append(("end", "", len(text) + 1))
    return tokens


class _Parser:
    def __init__(self, text, allow_decimal, allow_calls):
        self.text = text
        self.toks = tokenize(text)
        self.i = 0
        self.allow_decimal = allow_decimal
        self.allow_calls = allow_calls

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def fail(self, message, tok=None):
        tok = tok or self.peek()
        raise ExprSyntaxError(message, self.text, tok[2])

    def parse(self):
        if self.peek()[0] == "end":
            self.fail("empty expression")
        node = self.expr()
        if self.peek()[0] != "end":
            self.fail("unexpected token " + repr(self.peek()[1]))
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()
            rhs = self.term()
            node = ("add" if op[1] == "+" else "sub", node, rhs, op[2])
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()
            rhs = self.unary()
            node = ("mul" if op[1] == "*" else "div", node, rhs, op[2])
        return node

    def unary(self):
        tok = self.peek()
        if tok[0] == "op" and tok[1] in ("+", "-"):
            self.take()
            inner = self.unary()
            return inner if tok[1] == "+" else ("neg", inner, tok[2])
        return self.power()

    def power(self):
        base = self.atom()
        tok = self.peek()
        if tok[0] == "op" and tok[1] in ("^", "**"):
            self.take()
            exponent = self.unary()
            return ("pow", base, exponent, tok[2])
        return base

    def atom(self):
        tok = self.take()
        kind, val, col = tok
        if kind == "num":
            if "." in val:
                if not self.allow_decimal:
                    raise ExprSyntaxError(
                        "decimal literal not allowed, write a rational as p/q", self.text, col
                    )
                return ("num", float(val), col)
            return ("num", Fraction(int(val)), col)
        if kind == "name":
            if self.peek()[1] == "(" and self.peek()[0] == "op":
                if not self.allow_calls:
                    raise ExprSyntaxError(f"function call {val!r} not allowed here", self.text, col)
                self.take()
                args = [self.expr()]
                while self.peek()[1] == ",":
                    self.take()
                    args.append(self.expr())
                if self.take()[1] != ")":
                    self.fail("expected ')'", self.toks[self.i - 1])
                return ("call", val, tuple(args), col)
            return ("name", val, col)
        if kind == "op" and val == "(":
            node = self.expr()
            close = self.take()
            if close[1] != ")":
                raise ExprSyntaxError("expected ')'", self.text, close[2])
            return node
        if kind == "end":
            raise ExprSyntaxError("unexpected end of expression", self.text, col)
        raise ExprSyntaxError(f"unexpected token {val!r}", self.text, col)


def parse_tree(text, allow_decimal=False, allow_calls=False):
    if not isinstance(text, str):
        raise ExprSyntaxError(f"expression must be a string, got {type(text).__name__}")
    return _Parser(text, allow_decimal, allow_calls).parse()


def tree_names(node):
    """All bare names referenced by a parse tree (function names excluded)."""
    out = set()
    stack = [node]
    while stack:
        n = stack.pop()
        if n[0] == "name":
            out.add(n[1])
        elif n[0] == "call":
            stack.extend(n[2])
        elif n[0] == "num":
            pass
        elif n[0] == "neg":
            stack.append(n[1])
        else:
            stack.extend((n[1], n[2]))
    return out


_MATH = {
    "sin": math.sin, "cos": math.cos, "tan": math.tan, "exp": math.exp,
    "log": math.log, "sqrt": math.sqrt, "atan": math.atan, "asin": math.asin,
    "acos": math.acos, "sinh": math.sinh, "cosh": math.cosh, "tanh": math.tanh,
    "atan2": math.atan2,
}
_CONST = {"pi": math.pi, "e": math.e}


def compile_numeric(text):
    """Compile a numeric model such as ``tan(theta)`` into ``f(values) -> float``.

    Returns the callable and the set of variable names it reads.
    """
    tree = parse_tree(text, allow_decimal=True, allow_calls=True)

    def check(n):
        if n[0] == "call":
            if n[1] not in _MATH:
                raise ExprSyntaxError(f"unknown function {n[1]!r}", text, n[3])
            for a in n[2]:
                check(a)
        elif n[0] == "neg":
            check(n[1])
        elif n[0] not in ("num", "name"):
            check(n[1])
            check(n[2])

    check(tree)
    names = {x for x in tree_names(tree) if x not in _CONST}

    def run(n, env):
        tag = n[0]
        if tag == "num":
            return float(n[1])
        if tag == "name":
            if n[1] in env:
                return float(env[n[1]])
            return _CONST[n[1]]
        if tag == "neg":
            return -run(n[1], env)
        if tag == "call":
            return _MATH[n[1]](*(run(a, env) for a in n[2]))
        a, b = run(n[1], env), run(n[2], env)
        if tag == "add":
            return a + b
        if tag == "sub":
            return a - b
        if tag == "mul":
            return a * b
        if tag == "div":
            return a / b
        return a ** b

    return (lambda env: run(tree, env)), names
