"""Tiny arithmetic expression language with exact symbolic differentiation.

Grammar (infix, case sensitive)::

    expr    := term  (("+" | "-") term)*
    term    := factor (("*" | "/") factor)*
    factor  := "-" factor | power
    power   := atom ("^" factor)?          # right associative
    atom    := NUMBER | NAME | NAME "(" expr ")" | "(" expr ")"

Variables are ``x`` and ``y``; recognised functions are exp, log, sin,
cos, tan, sinh, cosh, tanh, sqrt.  Parsed expressions evaluate on numpy
arrays and differentiate symbolically, so conformal factors entered as
text get machine-accurate second derivatives instead of finite
differences.
"""

from __future__ import annotations

import numpy as np

_FUNCTIONS = {
    "exp": np.exp,
    "log": np.log,
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "sinh": np.sinh,
    "cosh": np.cosh,
    "tanh": np.tanh,
    "sqrt": np.sqrt,
}

_VARIABLES = ("x", "y")


class ExpressionError(ValueError):
    """Raised for unparseable input or unknown names."""


# ---------------------------------------------------------------- AST nodes


class Node:
    def __call__(self, x, y):
        raise NotImplementedError

    def diff(self, var):
        raise NotImplementedError

    def __repr__(self):
        return f"<expr {self}>"


class Num(Node):
    def __init__(self, value):
        self.value = float(value)

    def __call__(self, x, y):
        return np.broadcast_to(np.float64(self.value), np.broadcast(x, y).shape).copy() \
            if np.ndim(x) or np.ndim(y) else self.value

    def diff(self, var):
        return Num(0.0)

    def __str__(self):
        return repr(self.value)


class Var(Node):
    def __init__(self, name):
        self.name = name

    def __call__(self, x, y):
        return np.asarray(x, dtype=float) if self.name == "x" else np.asarray(y, dtype=float)

    def diff(self, var):
        return Num(1.0 if var == self.name else 0.0)

    def __str__(self):
        return self.name


def _is_const(node, value=None):
    if not isinstance(node, Num):
        return False
    return True if value is None else node.value == value


class Add(Node):
    def __init__(self, a, b):
        self.a, self.b = a, b

    def __call__(self, x, y):
        return self.a(x, y) + self.b(x, y)

    def diff(self, var):
        return add(self.a.diff(var), self.b.diff(var))

    def __str__(self):
        return f"({self.a} + {self.b})"


class Sub(Node):
    def __init__(self, a, b):
        self.a, self.b = a, b

    def __call__(self, x, y):
        return self.a(x, y) - self.b(x, y)

    def diff(self, var):
        return sub(self.a.diff(var), self.b.diff(var))

    def __str__(self):
        return f"({self.a} - {self.b})"


class Mul(Node):
    def __init__(self, a, b):
        self.a, self.b = a, b

    def __call__(self, x, y):
        return self.a(x, y) * self.b(x, y)

    def diff(self, var):
        return add(mul(self.a.diff(var), self.b), mul(self.a, self.b.diff(var)))

    def __str__(self):
        return f"({self.a} * {self.b})"


class Div(Node):
    def __init__(self, a, b):
        self.a, self.b = a, b

    def __call__(self, x, y):
        return self.a(x, y) / self.b(x, y)

    def diff(self, var):
        num = sub(mul(self.a.diff(var), self.b), mul(self.a, self.b.diff(var)))
        return Div(num, mul(self.b, self.b))

    def __str__(self):
        return f"({self.a} / {self.b})"


class Pow(Node):
    def __init__(self, a, b):
        self.a, self.b = a, b

    def __call__(self, x, y):
        return self.a(x, y) ** self.b(x, y)

    def diff(self, var):
        if _is_const(self.b):
            n = self.b.value
            return mul(mul(Num(n), Pow(self.a, Num(n - 1.0))), self.a.diff(var))
        # general a^b = exp(b log a)
        term1 = mul(self.b.diff(var), Call("log", self.a))
        term2 = mul(self.b, Div(self.a.diff(var), self.a))
        return mul(self, add(term1, term2))

    def __str__(self):
        return f"({self.a} ^ {self.b})"


class Neg(Node):
    def __init__(self, a):
        self.a = a

    def __call__(self, x, y):
        return -self.a(x, y)

    def diff(self, var):
        return neg(self.a.diff(var))

    def __str__(self):
        return f"(-{self.a})"


class Call(Node):
    def __init__(self, fn, a):
        if fn not in _FUNCTIONS:
            raise ExpressionError(f"unknown function {fn!r}")
        self.fn, self.a = fn, a

    def __call__(self, x, y):
        return _FUNCTIONS[self.fn](self.a(x, y))

    def diff(self, var):
        a, da = self.a, self.a.diff(var)
        outer = {
            "exp": lambda: Call("exp", a),
            "log": lambda: Div(Num(1.0), a),
            "sin": lambda: Call("cos", a),
            "cos": lambda: neg(Call("sin", a)),
            "tan": lambda: Div(Num(1.0), Pow(Call("cos", a), Num(2.0))),
            "sinh": lambda: Call("cosh", a),
            "cosh": lambda: Call("sinh", a),
            "tanh": lambda: Div(Num(1.0), Pow(Call("cosh", a), Num(2.0))),
            "sqrt": lambda: Div(Num(0.5), Call("sqrt", a)),
        }[self.fn]()
        return mul(outer, da)

    def __str__(self):
        return f"{self.fn}({self.a})"


# Constant-folding constructors keep derivative trees small enough to be
# readable and cheap to evaluate.

def add(a, b):
    if _is_const(a, 0.0):
        return b
    if _is_const(b, 0.0):
        return a
    if _is_const(a) and _is_const(b):
        return Num(a.value + b.value)
    return Add(a, b)


def sub(a, b):
    if _is_const(b, 0.0):
        return a
    if _is_const(a) and _is_const(b):
        return Num(a.value - b.value)
    if _is_const(a, 0.0):
        return neg(b)
    return Sub(a, b)


def mul(a, b):
    if _is_const(a, 0.0) or _is_const(b, 0.0):
        return Num(0.0)
    if _is_const(a, 1.0):
        return b
    if _is_const(b, 1.0):
        return a
    if _is_const(a) and _is_const(b):
        return Num(a.value * b.value)
    return Mul(a, b)


def neg(a):
    if _is_const(a):
        return Num(-a.value)
    if isinstance(a, Neg):
        return a.a
    return Neg(a)


# ------------------------------------------------------------------ parser


class _Tokenizer:
    def __init__(self, text):
        self.text = text
        self.pos = 0
        self.tokens = []
        self._scan()
        self.idx = 0

    def _scan(self):
        text, i, n = self.text, 0, len(self.text)
        while i < n:
            ch = text[i]
            if ch.isspace():
                i += 1
                continue
            if ch in "+-*/^()":
                self.tokens.append((ch, ch, i))
                i += 1
                continue
            if ch.isdigit() or ch == ".":
                j = i
                while j < n and (text[j].isdigit() or text[j] == "."):
                    j += 1
                if j < n and text[j] in "eE":
                    k = j + 1
                    if k < n and text[k] in "+-":
                        k += 1
                    if k < n and text[k].isdigit():
                        j = k
                        while j < n and text[j].isdigit():
                            j += 1
                try:
                    value = float(text[i:j])
                except ValueError:
                    raise ExpressionError(
                        f"bad number {text[i:j]!r} at position {i}") from None
                self.tokens.append(("num", value, i))
                i = j
                continue
            if ch.isalpha() or ch == "_":
                j = i
                while j < n and (text[j].isalnum() or text[j] == "_"):
                    j += 1
                self.tokens.append(("name", text[i:j], i))
                i = j
                continue
            raise ExpressionError(f"unexpected character {ch!r} at position {i}")
        self.tokens.append(("end", None, n))

    def peek(self):
        return self.tokens[self.idx]

    def next(self):
        tok = self.tokens[self.idx]
        self.idx += 1
        return tok


class _Parser:
    def __init__(self, text):
        self.text = text
        self.toks = _Tokenizer(text)

    def parse(self):
        node = self.expr()
        kind, _, pos = self.toks.peek()
        if kind != "end":
            raise ExpressionError(f"trailing input at position {pos} in {self.text!r}")
        return node

    def expr(self):
        node = self.term()
        while self.toks.peek()[0] in ("+", "-"):
            op = self.toks.next()[0]
            rhs = self.term()
            node = add(node, rhs) if op == "+" else sub(node, rhs)
        return node

    def term(self):
        node = self.factor()
        while self.toks.peek()[0] in ("*", "/"):
            op = self.toks.next()[0]
            rhs = self.factor()
            node = mul(node, rhs) if op == "*" else Div(node, rhs)
        return node

    def factor(self):
        if self.toks.peek()[0] == "-":
            self.toks.next()
            return neg(self.factor())
        return self.power()

    def power(self):
        base = self.atom()
        if self.toks.peek()[0] == "^":
            self.toks.next()
            return Pow(base, self.factor())
        return base

    def atom(self):
        kind, value, pos = self.toks.next()
        if kind == "num":
            return Num(value)
        if kind == "name":
            if self.toks.peek()[0] == "(":
                self.toks.next()
                arg = self.expr()
                self._expect(")")
                return Call(value, arg)
            if value in _VARIABLES:
                return Var(value)
            if value == "pi":
                return Num(np.pi)
            if value == "e":
                return Num(np.e)
            raise ExpressionError(f"unknown name {value!r} at position {pos}")
        if kind == "(":
            node = self.expr()
            self._expect(")")
            return node
        raise ExpressionError(f"unexpected token at position {pos} in {self.text!r}")

    def _expect(self, kind):
        tok = self.toks.next()
        if tok[0] != kind:
            raise ExpressionError(f"expected {kind!r} at position {tok[2]}")


def parse_expression(text: str) -> Node:
    """Parse ``text`` into an evaluable, differentiable expression tree."""
    if not isinstance(text, str) or not text.strip():
        raise ExpressionError("empty expression")
    return _Parser(text).parse()
