"""Recursive-descent parser for the expression surface language.

Grammar:

    expr     := term (('+' | '-') term)*
    term     := unary (('*' | '/') unary)*
    unary    := '-' unary | power
    power    := primary ['^' exponent]
    primary  := INT | NAME | '(' expr ')' | 'abs' '(' expr ')'
    exponent := ['-'] INT | '(' ['-'] INT '/' INT ')'

'^' binds tighter than '*' and '/'; unary minus binds looser than '^'.
Variable names match [A-Za-z_][A-Za-z0-9_]*; 'abs' is reserved.  Rational
literals n/m are ordinary division and need no special casing.  Jet variables
(f_x, g_pp, ...) are plain names here; the jets module normalizes the
multi-index order when it declares them.
"""

from __future__ import annotations

import re
from fractions import Fraction

from .errors import ParseError
from .expression import Expression, as_expression, rational_power

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z0-9_]*)|(\^|\+|-|\*|/|\(|\)))")


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            raise ParseError(f"unexpected character {stripped[0]!r}", pos)
        if m.group(1) is not None:
            tokens.append(("int", int(m.group(1)), m.start(1)))
        elif m.group(2) is not None:
            tokens.append(("name", m.group(2), m.start(2)))
        else:
            tokens.append(("op", m.group(3), m.start(3)))
        pos = m.end()
    tokens.append(("end", None, len(text)))
    return tokens


class _Parser:
    def __init__(self, text, allowed=None):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0
        self.allowed = allowed

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op):
        kind, value, pos = self.peek()
        if kind != "op" or value != op:
            raise ParseError(f"expected {op!r}", pos)
        self.advance()

    def parse(self):
        e = self.expr()
        kind, value, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected trailing input {value!r}", pos)
        return e

    def expr(self):
        e = self.term()
        while True:
            kind, value, _ = self.peek()
            if kind == "op" and value in "+-":
                self.advance()
                rhs = self.term()
                e = e + rhs if value == "+" else e - rhs
            else:
                return e

    def term(self):
        e = self.unary()
        while True:
            kind, value, pos = self.peek()
            if kind == "op" and value in "*/":
                self.advance()
                rhs = self.unary()
                if value == "*":
                    e = e * rhs
                else:
                    if rhs.is_zero:
                        raise ParseError("division by literal zero", pos)
                    e = e / rhs
            else:
                return e

    def unary(self):
        kind, value, _ = self.peek()
        if kind == "op" and value == "-":
            self.advance()
            return -self.unary()
        return self.power()

    def power(self):
        base = self.primary()
        kind, value, _ = self.peek()
        if kind == "op" and value == "^":
            self.advance()
            take_abs = getattr(base, "_abs_marker", False)
            exponent = self.exponent()
            return rational_power(base, exponent, absolute=take_abs)
        return base

    def exponent(self) -> Fraction:
        sign = 1
        kind, value, pos = self.peek()
        if kind == "op" and value == "-":
            self.advance()
            sign = -1
            kind, value, pos = self.peek()
        if kind == "int":
            self.advance()
            return Fraction(sign * value)
        if kind == "op" and value == "(":
            self.advance()
            inner_sign = 1
            kind, value, pos = self.peek()
            if kind == "op" and value == "-":
                self.advance()
                inner_sign = -1
                kind, value, pos = self.peek()
            if kind != "int":
                raise ParseError("expected integer in exponent", pos)
            num = self.advance()[1]
            self.expect_op("/")
            kind, value, pos = self.peek()
            if kind != "int":
                raise ParseError("expected integer denominator in exponent", pos)
            den = self.advance()[1]
            if den == 0:
                raise ParseError("zero denominator in exponent", pos)
            self.expect_op(")")
            return Fraction(sign * inner_sign * num, den)
        raise ParseError("expected integer or (n/m) exponent", pos)

    def primary(self):
        kind, value, pos = self.advance()
        if kind == "int":
            return Expression.const(value)
        if kind == "name":
            if value == "abs":
                self.expect_op("(")
                inner = self.expr()
                self.expect_op(")")
                # abs only matters under a rational power; tag it for power()
                wrapped = _AbsTagged(inner)
                return wrapped
            if self.allowed is not None and value not in self.allowed:
                raise ParseError(f"unknown variable {value!r}", pos)
            return Expression.var(self._normalize_name(value))
        if kind == "op" and value == "(":
            e = self.expr()
            self.expect_op(")")
            return e
        raise ParseError(f"unexpected token {value!r}", pos)

    def _normalize_name(self, name):
        # jet spellings like f_yx normalize to sorted multi-index f_xy
        if "_" in name:
            head, _, tail = name.partition("_")
            if head and tail and all(ch in "xyp" for ch in tail):
                return head + "_" + "".join(sorted(tail))
        return name


class _AbsTagged(Expression):
    """Expression wrapper marking that a following '^' applies to abs(...)."""

    __slots__ = ()
    _abs_marker = True

    def __new__(cls, inner):
        obj = object.__new__(cls)
        return obj

    def __init__(self, inner):
        Expression.__init__(self, inner.num, inner.den, _normalized=True)


def parse(text: str, allowed=None) -> Expression:
    """Parse the surface syntax into a canonical Expression.

    With `allowed` (an iterable of names), unknown variables are rejected.
    A bare abs(u) with no exponent is the identity on the positive chart and
    parses to u itself.
    """
    names = set(allowed) if allowed is not None else None
    result = _Parser(text, names).parse()
    if isinstance(result, _AbsTagged):
        return Expression(result.num, result.den, _normalized=True)
    return result
