"""Render polynomials and expressions in the surface grammar.

The output parses back to the same canonical form (round-trip identity).
"""

from __future__ import annotations

from math import gcd

from .poly import Poly, generator, mono_sort_key


def _exponent_str(num: int, den: int) -> str:
    g = gcd(num, den)
    num //= g
    den //= g
    if den == 1:
        return f"^{num}" if num != 1 else ""
    return f"^({num}/{den})"


def _factor_str(idx: int, exp: int) -> str:
    gen = generator(idx)
    if gen.is_atom:
        base = poly_to_string(gen.base)
        wrapped = f"abs({base})" if gen.take_abs else f"({base})"
        return wrapped + _exponent_str(exp, gen.root)
    return gen.name + _exponent_str(exp, 1)


def _coeff_str(c) -> str:
    if c.denominator == 1:
        return str(c.numerator)
    return f"{c.numerator}/{c.denominator}"


def _term_str(mono, coeff) -> str:
    factors = [_factor_str(i, e) for i, e in enumerate(mono) if e]
    if not factors:
        return _coeff_str(coeff)
    if coeff == 1:
        return "*".join(factors)
    if coeff == -1:
        return "-" + "*".join(factors)
    return "*".join([_coeff_str(coeff)] + factors)


def poly_to_string(p: Poly) -> str:
    if p.is_zero:
        return "0"
    parts = []
    for mono in sorted(p.terms, key=mono_sort_key, reverse=True):
        term = _term_str(mono, p.terms[mono])
        if not parts:
            parts.append(term)
        elif term.startswith("-"):
            parts.append(" - " + term[1:])
        else:
            parts.append(" + " + term)
    return "".join(parts)


def expression_to_string(e) -> str:
    if e.den.is_one:
        return poly_to_string(e.num)
    return f"({poly_to_string(e.num)})/({poly_to_string(e.den)})"
