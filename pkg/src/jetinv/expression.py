"""Canonical exact expressions: rational functions in variables and radical atoms.

An Expression is a reduced fraction num/den of :class:`~jetinv.poly.Poly`:

* ``den`` is atom-free and monic in the fixed term order;
* ``num`` and ``den`` have no common polynomial factor (full multivariate gcd,
  computed jointly over the atom components of the numerator);
* radical atoms ``base**(q)`` with non-integer rational ``q`` appear only in
  the numerator, with exponent reduced to the open unit interval (integer
  parts are folded into ordinary polynomial factors).

Consequences: two expressions in the rational fragment are semantically equal
iff they are structurally equal, and the same holds in the presence of
radicals as long as distinct atom bases are not related multiplicatively
(no attempt is made to recognize e.g. sqrt(P*Q**2) = Q*sqrt(P)).

Everything is immutable; all operations are pure functions.
"""

from __future__ import annotations

from fractions import Fraction

import gmpy2
from gmpy2 import mpq

from .errors import ExpressionError
from .poly import (ONE, ZERO, Generator, Poly, atom_generator, divides,
                   generator, mono_from_gen, poly_gcd, rat, variable)


class Expression:
    __slots__ = ("num", "den", "_hash")

    def __init__(self, num: Poly, den: Poly, _normalized=False):
        if not _normalized:
            num, den = _normalize(num, den)
        self.num = num
        self.den = den
        self._hash = None

    # -- constructors -----------------------------------------------------

    @staticmethod
    def const(value) -> "Expression":
        return Expression(Poly.const(value), ONE, _normalized=True)

    @staticmethod
    def var(name: str) -> "Expression":
        return Expression(Poly.from_gen(variable(name)), ONE, _normalized=True)

    @staticmethod
    def from_poly(p: Poly) -> "Expression":
        return Expression(p, ONE, _normalized=True)

    # -- predicates --------------------------------------------------------

    @property
    def is_zero(self):
        return self.num.is_zero

    @property
    def is_one(self):
        return self.num.is_one and self.den.is_one

    @property
    def is_rational_constant(self):
        return self.num.is_constant and self.den.is_constant

    def constant_value(self) -> mpq:
        if not self.is_rational_constant:
            raise ExpressionError("not a constant expression")
        return self.num.constant_value() / self.den.constant_value()

    def gens(self):
        return self.num.gens() | self.den.gens()

    def variables(self):
        """Names of all free variables, including those inside atom bases."""
        seen = set()
        stack = [self.num, self.den]
        while stack:
            p = stack.pop()
            for i in p.gens():
                g = generator(i)
                if g.is_atom:
                    stack.append(g.base)
                else:
                    seen.add(g.name)
        return seen

    def has_atoms(self):
        return self.num.has_atoms()

    # -- equality ----------------------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, Expression):
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.num, self.den))
        return self._hash

    # -- arithmetic ----------------------------------------------------------

    def __neg__(self):
        return Expression(-self.num, self.den, _normalized=True)

    def __add__(self, other):
        other = as_expression(other)
        n1, d1, n2, d2 = self.num, self.den, other.num, other.den
        if d1 == d2:
            return Expression(n1 + n2, d1)
        if d1.is_one:
            return Expression(n1 * d2 + n2, d2)
        if d2.is_one:
            return Expression(n1 + n2 * d1, d1)
        g = poly_gcd(d1, d2)
        if g.is_one or g.is_constant:
            num = n1 * d2 + n2 * d1
            den = d1 * d2
            return _monic(num, den)
        t2 = divides(g, d2)
        t1 = divides(g, d1)
        num = n1 * t2 + n2 * t1
        den = d1 * t2
        # any surviving common factor divides g
        h = _gcd_with_numerator(num, g)
        if not (h.is_one or h.is_constant):
            num = divides(h, num)
            den = divides(h, den)
        return _monic(num, den)

    def __radd__(self, other):
        return as_expression(other) + self

    def __sub__(self, other):
        return self + (-as_expression(other))

    def __rsub__(self, other):
        return as_expression(other) + (-self)

    def __mul__(self, other):
        other = as_expression(other)
        n1, d1, n2, d2 = self.num, self.den, other.num, other.den
        if self.is_zero or other.is_zero:
            return EXPR_ZERO
        if not d2.is_one:
            g = _gcd_with_numerator(n1, d2)
            if not (g.is_one or g.is_constant):
                n1 = divides(g, n1)
                d2 = divides(g, d2)
        if not d1.is_one:
            g = _gcd_with_numerator(n2, d1)
            if not (g.is_one or g.is_constant):
                n2 = divides(g, n2)
                d1 = divides(g, d1)
        if n1.has_atoms() and n2.has_atoms():
            # radical folding (s*s -> base) can create fresh common factors
            return Expression(n1 * n2, d1 * d2)
        return _monic(n1 * n2, d1 * d2)

    def __rmul__(self, other):
        return self * other

    def __truediv__(self, other):
        other = as_expression(other)
        return self * other.inverse()

    def __rtruediv__(self, other):
        return as_expression(other) * self.inverse()

    def inverse(self) -> "Expression":
        if self.is_zero:
            raise ExpressionError("division by zero expression")
        num, den = self.num, self.den
        if not num.has_atoms():
            return _monic(den, num)
        mult, cleared = _rationalize(num)
        return Expression(den * mult, cleared)

    def scale(self, q) -> "Expression":
        q = rat(q)
        if q == 0:
            return EXPR_ZERO
        return Expression(self.num.scale(q), self.den, _normalized=True)

    def __pow__(self, exponent):
        if isinstance(exponent, int):
            if exponent == 0:
                return EXPR_ONE
            if exponent < 0:
                return self.inverse() ** (-exponent)
            if self.num.has_atoms():
                return Expression(self.num ** exponent, self.den ** exponent)
            return _monic(self.num ** exponent, self.den ** exponent)
        return rational_power(self, exponent)

    def __repr__(self):
        from .printer import expression_to_string
        return expression_to_string(self)

    def __str__(self):
        return self.__repr__()


EXPR_ZERO = Expression(ZERO, ONE, _normalized=True)
EXPR_ONE = Expression(ONE, ONE, _normalized=True)


def as_expression(obj) -> Expression:
    if isinstance(obj, Expression):
        return obj
    if isinstance(obj, Poly):
        return Expression.from_poly(obj)
    if isinstance(obj, Generator):
        return Expression.from_poly(Poly.from_gen(obj))
    if isinstance(obj, str):
        return Expression.var(obj)
    return Expression.const(rat(obj))


# ---------------------------------------------------------------------------
# normalization


def _monic(num: Poly, den: Poly) -> Expression:
    """Normalize scale only; fraction is already known to be reduced."""
    if den.is_zero:
        raise ExpressionError("division by zero expression")
    if num.is_zero:
        return EXPR_ZERO
    _, lead = den.leading()
    if lead != 1:
        num = num.scale(1 / lead)
        den = den.scale(1 / lead)
    return Expression(num, den, _normalized=True)


def _gcd_with_numerator(num: Poly, den: Poly) -> Poly:
    """gcd of an atom-bearing numerator with an atom-free polynomial."""
    if num.is_zero:
        return den
    if not num.has_atoms():
        return poly_gcd(num, den)
    g = den
    for part in num.split_by_atoms().values():
        g = poly_gcd(g, part)
        if g.is_one or g.is_constant:
            return ONE
    return g


def _normalize(num: Poly, den: Poly) -> tuple[Poly, Poly]:
    if den.is_zero:
        raise ExpressionError("division by zero expression")
    if den.has_atoms():
        mult, cleared = _rationalize(den)
        num, den = num * mult, cleared
    if num.is_zero:
        return ZERO, ONE
    if not den.is_constant:
        g = _gcd_with_numerator(num, den)
        if not (g.is_one or g.is_constant):
            num = divides(g, num)
            den = divides(g, den)
    _, lead = den.leading()
    if lead != 1:
        num = num.scale(1 / lead)
        den = den.scale(1 / lead)
    return num, den


def _rationalize(p: Poly) -> tuple[Poly, Poly]:
    """Return (mult, cleared) with p * mult = cleared atom-free.

    Square-root atoms are cleared by conjugation; higher roots only when the
    polynomial is a single term.  Mixed multi-term higher-root denominators
    are outside the supported fragment.
    """
    mult = ONE
    current = p
    while current.has_atoms():
        atom_idx = next(i for i in current.gens() if generator(i).is_atom)
        gen = generator(atom_idx)
        if gen.root == 2:
            parts = current.coeffs_in(atom_idx)
            a = parts.get(0, ZERO)
            b = parts.get(1, ZERO)
            conj = a - b.mul_mono(mono_from_gen(gen))
            mult = mult * conj
            current = a * a - (b * b) * gen.base
            if current.is_zero:
                raise ExpressionError(
                    "cannot rationalize: expression is a zero divisor of the "
                    "radical extension")
        elif current.is_monomial:
            mono, coeff = next(iter(current.terms.items()))
            e = mono[atom_idx]
            comp = mono_from_gen(gen, gen.root - e)
            mult = mult.mul_mono(comp)
            current = current.mul_mono(comp)
        else:
            raise ExpressionError(
                f"cannot rationalize a multi-term expression containing a "
                f"root-{gen.root} radical")
    return mult, current


# ---------------------------------------------------------------------------
# rational powers


def rational_power(e, exponent, absolute=False) -> Expression:
    """e**exponent for rational exponent; radical atoms carry the fractional part.

    With absolute=True the radical is |base|**q (numeric evaluation takes the
    absolute value of the base; symbolically the base is assumed positive).
    """
    e = as_expression(e)
    q = _as_fraction(exponent)
    if q.denominator == 1:
        return e ** int(q)
    if e.is_zero:
        if q > 0:
            return EXPR_ZERO
        raise ExpressionError("zero to a negative power")
    num_part = _poly_rational_power(e.num, q, absolute)
    den_part = _poly_rational_power(e.den, q, absolute)
    return num_part / den_part


def abs_power(e, exponent) -> Expression:
    """|e|**exponent on the positive chart: rational_power with absolute=True."""
    return rational_power(e, exponent, absolute=True)


def _as_fraction(q) -> Fraction:
    if isinstance(q, Fraction):
        return q
    if isinstance(q, int):
        return Fraction(q)
    return Fraction(int(q.numerator), int(q.denominator))


def _poly_rational_power(p: Poly, q: Fraction, absolute: bool) -> Expression:
    if p.is_zero:
        if q > 0:
            return EXPR_ZERO
        raise ExpressionError("zero to a negative power")
    if p.is_one:
        return EXPR_ONE
    content, prim = _signed_primitive(p)
    mono = prim.mono_content()
    core = divides(Poly({mono: mpq(1)}), prim) if mono else prim
    result = _const_rational_power(content, q, absolute)
    for idx, exp in enumerate(mono):
        if exp:
            result = result * _gen_rational_power(generator(idx), exp * q, absolute)
    if not core.is_one:
        if core.is_constant:
            result = result * _const_rational_power(core.constant_value(), q, absolute)
        else:
            result = result * _radical_of(core, q, absolute)
    return result


def _signed_primitive(p: Poly):
    c = p.content()
    _, lead = p.leading()
    if lead < 0:
        c = -c
    return c, p.scale(1 / c)


def _const_rational_power(c: mpq, q: Fraction, absolute: bool) -> Expression:
    if c < 0:
        if absolute:
            c = -c
        else:
            # keep the sign inside a constant radical base
            return _radical_of(Poly.const(c), q, absolute=False)
    if c == 1:
        return EXPR_ONE
    a, b = q.numerator, q.denominator
    nr, n_exact = gmpy2.iroot(c.numerator, b)
    dr, d_exact = gmpy2.iroot(c.denominator, b)
    if n_exact and d_exact:
        return Expression.const(mpq(int(nr), int(dr)) ** a)
    return _radical_of(Poly.const(c), q, absolute)


def _gen_rational_power(gen: Generator, q: Fraction, absolute: bool) -> Expression:
    if gen.is_atom:
        q = q / gen.root
        base = gen.base
        take_abs = absolute or gen.take_abs
    else:
        base = Poly.from_gen(gen)
        take_abs = absolute
    k, r = divmod(q.numerator, q.denominator)
    result = Expression.from_poly(base) ** int(k)
    if r:
        atom = atom_generator(base, int(q.denominator), take_abs)
        result = result * Expression.from_poly(
            Poly({mono_from_gen(atom, int(r)): mpq(1)}))
    return result


def _radical_of(base: Poly, q: Fraction, absolute: bool) -> Expression:
    k, r = divmod(q.numerator, q.denominator)
    result = Expression.from_poly(base) ** int(k)
    if r:
        atom = atom_generator(base, int(q.denominator), absolute)
        result = result * Expression.from_poly(
            Poly({mono_from_gen(atom, int(r)): mpq(1)}))
    return result


# ---------------------------------------------------------------------------
# differentiation


def derive(e, velocity) -> Expression:
    """Apply the derivation sending each variable v to velocity[v].

    velocity maps generator index (or Generator, or name) to Expression-like;
    unlisted variables have velocity zero.  Radical atoms are chased through
    the chain rule: d(base**q) = q * base**q * d(base)/base.
    """
    e = as_expression(e)
    vel = _velocity_table(velocity)
    dn = _derive_poly(e.num, vel)
    if e.den.is_one:
        return dn
    dd = _derive_poly(e.den, vel)
    den_expr = Expression.from_poly(e.den)
    if dd.is_zero:
        return dn / den_expr
    return (dn * den_expr - Expression.from_poly(e.num) * dd) / (den_expr * den_expr)


def _velocity_table(velocity) -> dict:
    vel = {}
    for key, value in velocity.items():
        if isinstance(key, Generator):
            idx = key.index
        elif isinstance(key, str):
            idx = variable(key).index
        else:
            idx = key
        vel[idx] = as_expression(value)
    return vel


def _derive_poly(p: Poly, vel: dict) -> Expression:
    total = EXPR_ZERO
    present = p.gens()
    for idx in present:
        gen = generator(idx)
        if gen.is_atom:
            continue
        v = vel.get(idx)
        if v is None or v.is_zero:
            continue
        part = p.diff_var_formal(idx)
        if not part.is_zero:
            total = total + Expression.from_poly(part) * v
    for idx in present:
        gen = generator(idx)
        if not gen.is_atom:
            continue
        dbase = _derive_poly(gen.base, vel)
        if dbase.is_zero:
            continue
        by_exp = p.coeffs_in(idx)
        for e, coeff in by_exp.items():
            if e == 0:
                continue
            with_atom = coeff.mul_mono(mono_from_gen(gen, e))
            factor = Expression.from_poly(with_atom).scale(mpq(e, gen.root))
            total = total + factor * dbase / Expression.from_poly(gen.base)
    return total


def partial(e, var) -> Expression:
    """Exact partial derivative with respect to one variable."""
    if isinstance(var, str):
        var = variable(var)
    return derive(e, {var.index: EXPR_ONE})


# ---------------------------------------------------------------------------
# substitution


def substitute(e, mapping) -> Expression:
    """Replace variables by expressions (simultaneously)."""
    e = as_expression(e)
    table = _velocity_table(mapping)
    if not table:
        return e
    cache: dict = {}
    num = _subs_poly(e.num, table, cache)
    den = _subs_poly(e.den, table, cache)
    return num / den


def _subs_poly(p: Poly, table: dict, cache: dict) -> Expression:
    affected = _affected_gens(p, table, cache)
    if not affected:
        return Expression.from_poly(p)
    total = EXPR_ZERO
    clean_terms: dict = {}
    for mono, c in p.terms.items():
        touched = any(e and i in affected for i, e in enumerate(mono))
        if not touched:
            clean_terms[mono] = c
            continue
        term = Expression.const(c)
        for i, e in enumerate(mono):
            if not e:
                continue
            term = term * _gen_power_subbed(i, e, table, cache)
        total = total + term
    if clean_terms:
        total = total + Expression.from_poly(Poly(clean_terms))
    return total


def _affected_gens(p: Poly, table: dict, cache: dict) -> set:
    affected = set()
    for i in p.gens():
        gen = generator(i)
        if gen.is_atom:
            if _affected_gens(gen.base, table, cache):
                affected.add(i)
        elif i in table:
            affected.add(i)
    return affected


def _gen_power_subbed(idx: int, exp: int, table: dict, cache: dict) -> Expression:
    key = (idx, exp)
    hit = cache.get(key)
    if hit is not None:
        return hit
    gen = generator(idx)
    if gen.is_atom:
        if _affected_gens(gen.base, table, cache):
            new_base = _subs_poly(gen.base, table, cache)
            value = rational_power(new_base, Fraction(exp, gen.root),
                                   absolute=gen.take_abs)
        else:
            value = Expression.from_poly(Poly({mono_from_gen(gen, exp): mpq(1)}))
    elif idx in table:
        value = table[idx] ** exp
    else:
        value = Expression.from_poly(Poly({mono_from_gen(gen, exp): mpq(1)}))
    cache[key] = value
    return value
