"""Laurent polynomials in x, y, z with integer coefficients, and a small parser.

Grammar (whitespace ignored)::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor | factor)*      # juxtaposition multiplies
    factor := ('+' | '-') factor | atom ('^' ['-'] INT)?
    atom   := INT | 'x' | 'y' | 'z' | '(' expr ')'

Division and negative powers are allowed only for monomials, so every
expression denotes a Laurent polynomial.  '**' is accepted for '^'.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Mapping

Exponent = tuple[int, int, int]

VARIABLES = ("x", "y", "z")


class LaurentParseError(ValueError):
    pass


@dataclass(frozen=True)
class LaurentPolynomial3:
    """Finitely supported map Z^3 -> Z, stored sorted without zero coefficients."""

    terms: tuple[tuple[Exponent, int], ...] = ()

    def __post_init__(self) -> None:
        merged: dict[Exponent, int] = {}
        for e, c in self.terms:
            e = tuple(int(v) for v in e)
            if len(e) != 3:
                raise ValueError("exponents must have three components")
            merged[e] = merged.get(e, 0) + int(c)
        object.__setattr__(self, "terms", tuple(sorted((e, c) for e, c in merged.items() if c)))

    @classmethod
    def from_dict(cls, coeffs: Mapping[Exponent, int]) -> LaurentPolynomial3:
        return cls(tuple(coeffs.items()))

    @classmethod
    def constant(cls, c: int) -> LaurentPolynomial3:
        return cls((((0, 0, 0), c),))

    @classmethod
    def monomial(cls, e: Exponent, c: int = 1) -> LaurentPolynomial3:
        return cls(((e, c),))

    @classmethod
    def parse(cls, text: str) -> LaurentPolynomial3:
        return parse_laurent(text)

    def as_dict(self) -> dict[Exponent, int]:
        return dict(self.terms)

    @property
    def support(self) -> list[Exponent]:
        return [e for e, _ in self.terms]

    def is_zero(self) -> bool:
        return not self.terms

    def is_monomial(self) -> bool:
        return len(self.terms) == 1

    def constant_term(self) -> int:
        return self.as_dict().get((0, 0, 0), 0)

    def __add__(self, other: LaurentPolynomial3) -> LaurentPolynomial3:
        return LaurentPolynomial3(self.terms + other.terms)

    def __neg__(self) -> LaurentPolynomial3:
        return LaurentPolynomial3(tuple((e, -c) for e, c in self.terms))

    def __sub__(self, other: LaurentPolynomial3) -> LaurentPolynomial3:
        return self + (-other)

    def __mul__(self, other: LaurentPolynomial3) -> LaurentPolynomial3:
        out: dict[Exponent, int] = {}
        for e1, c1 in self.terms:
            for e2, c2 in other.terms:
                e = (e1[0] + e2[0], e1[1] + e2[1], e1[2] + e2[2])
                out[e] = out.get(e, 0) + c1 * c2
        return LaurentPolynomial3.from_dict(out)

    def __pow__(self, k: int) -> LaurentPolynomial3:
        if k < 0:
            if not self.is_monomial():
                raise ValueError("only monomials have Laurent inverses")
            (e, c), = self.terms
            if abs(c) != 1:
                raise ValueError("inverse needs a unit coefficient")
            return LaurentPolynomial3.monomial(tuple(-v * -k for v in e), c ** (-k))
        result = LaurentPolynomial3.constant(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def divide_by_monomial(self, other: LaurentPolynomial3) -> LaurentPolynomial3:
        if not other.is_monomial():
            raise ValueError("division only by monomials")
        (e2, c2), = other.terms
        out = []
        for e, c in self.terms:
            if c % c2:
                raise ValueError("coefficient not divisible by the monomial's coefficient")
            out.append(((e[0] - e2[0], e[1] - e2[1], e[2] - e2[2]), c // c2))
        return LaurentPolynomial3(tuple(out))

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for e, c in sorted(self.terms, key=lambda t: (sum(t[0]), t[0])):
            mono = "*".join(
                v if k == 1 else f"{v}^{k}" for v, k in zip(VARIABLES, e) if k
            )
            if not mono:
                body = str(abs(c))
            elif abs(c) == 1:
                body = mono
            else:
                body = f"{abs(c)}*{mono}"
            parts.append(("-" if c < 0 else "+", body))
        text = "".join(f" {s} {b}" for s, b in parts).strip()
        return text[2:] if text.startswith("+ ") else "-" + text[2:]


_TOKEN = re.compile(r"\s*(?:(\d+)|(\*\*|[xyz+\-*/^()]))")


def _tokenize(text: str) -> list[str]:
    tokens, pos = [], 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise LaurentParseError(f"unexpected character at {pos}: {text[pos:pos + 10]!r}")
        tokens.append(m.group(1) or ("^" if m.group(2) == "**" else m.group(2)))
        pos = m.end()
        while pos < len(text) and text[pos].isspace():
            pos += 1
    return tokens


class _Parser:
    def __init__(self, tokens: list[str]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> str | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self, expected: str | None = None) -> str:
        tok = self.peek()
        if tok is None or (expected is not None and tok != expected):
            raise LaurentParseError(f"expected {expected or 'token'}, found {tok!r}")
        self.pos += 1
        return tok

    def expr(self) -> LaurentPolynomial3:
        value = self.term()
        while self.peek() in ("+", "-"):
            op = self.take()
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self) -> LaurentPolynomial3:
        value = self.factor()
        while True:
            tok = self.peek()
            if tok == "*":
                self.take()
                value = value * self.factor()
            elif tok == "/":
                self.take()
                denom = self.factor()
                try:
                    value = value.divide_by_monomial(denom)
                except ValueError as exc:
                    raise LaurentParseError(str(exc)) from None
            elif tok is not None and (tok == "(" or tok in VARIABLES or tok.isdigit()):
                value = value * self.factor()
            else:
                return value

    def factor(self) -> LaurentPolynomial3:
        tok = self.peek()
        if tok in ("+", "-"):
            self.take()
            inner = self.factor()
            return inner if tok == "+" else -inner
        base = self.atom()
        if self.peek() == "^":
            self.take()
            sign = 1
            if self.peek() == "-":
                self.take()
                sign = -1
            tok = self.take()
            if not tok.isdigit():
                raise LaurentParseError(f"exponent must be an integer, found {tok!r}")
            try:
                return base ** (sign * int(tok))
            except ValueError as exc:
                raise LaurentParseError(str(exc)) from None
        return base

    def atom(self) -> LaurentPolynomial3:
        tok = self.take()
        if tok.isdigit():
            return LaurentPolynomial3.constant(int(tok))
        if tok in VARIABLES:
            e = [0, 0, 0]
            e[VARIABLES.index(tok)] = 1
            return LaurentPolynomial3.monomial(tuple(e))
        if tok == "(":
            value = self.expr()
            self.take(")")
            return value
        raise LaurentParseError(f"unexpected token {tok!r}")


def parse_laurent(text: str) -> LaurentPolynomial3:
    tokens = _tokenize(text)
    if not tokens:
        raise LaurentParseError("empty expression")
    parser = _Parser(tokens)
    value = parser.expr()
    if parser.peek() is not None:
        raise LaurentParseError(f"trailing input at token {parser.peek()!r}")
    return value


def laurent_from_terms(terms: Iterable[tuple[Exponent, int]]) -> LaurentPolynomial3:
    return LaurentPolynomial3(tuple(terms))
