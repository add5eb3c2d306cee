"""Sparse multivariate polynomials over Q, with radical atoms as extra generators.

Generators are interned process-wide.  Two kinds exist:

* ordinary variables (``root == 1``);
* radical atoms: a generator standing for ``base**(1/root)`` where ``base``
  is a polynomial and ``root > 1``.  Atoms are keyed by (base, root, take_abs),
  so structurally equal radicals share a generator.  ``take_abs`` marks atoms
  written ``abs(base)**q``; it changes numeric evaluation only (symbolic work
  happens on the chart where the base is positive).

A monomial is a tuple of non-negative integer exponents indexed by generator,
trimmed of trailing zeros (so the representation is independent of how many
generators exist).  For an atom generator the stored exponent counts units of
``1/root``; canonical monomials keep it strictly between 0 and root, the
integer part being folded out into ordinary polynomial factors of the base.

Coefficients are ``gmpy2.mpq`` (exact rationals).  Polynomials are immutable
after construction; the registry is the only shared mutable structure and is
guarded by a lock for writes.
"""

from __future__ import annotations

import threading
from fractions import Fraction

from gmpy2 import mpq

from .errors import ExpressionError

RATIONAL_TYPES = (int, type(mpq()), Fraction)


def rat(value) -> mpq:
    """Coerce an int/Fraction/mpq (or 'n/m' string) to mpq."""
    if isinstance(value, RATIONAL_TYPES):
        return mpq(value)
    if isinstance(value, str):
        return mpq(value)
    raise ExpressionError(f"not an exact rational: {value!r}")


class Generator:
    """Interned symbol: an ordinary variable or a radical atom."""

    __slots__ = ("index", "name", "root", "base", "take_abs")

    def __init__(self, index, name, root=1, base=None, take_abs=False):
        self.index = index
        self.name = name
        self.root = root
        self.base = base
        self.take_abs = take_abs

    @property
    def is_atom(self):
        return self.root > 1

    def __repr__(self):
        return f"Generator({self.name!r})"


_lock = threading.Lock()
_generators: list[Generator] = []
_vars_by_name: dict[str, Generator] = {}
_atoms_by_key: dict[tuple, Generator] = {}


def variable(name: str) -> Generator:
    """Intern an ordinary variable by name."""
    gen = _vars_by_name.get(name)
    if gen is not None:
        return gen
    with _lock:
        gen = _vars_by_name.get(name)
        if gen is None:
            gen = Generator(len(_generators), name)
            _generators.append(gen)
            _vars_by_name[name] = gen
        return gen


def atom_generator(base: "Poly", root: int, take_abs: bool) -> Generator:
    """Intern the radical atom base**(1/root)."""
    if root < 2:
        raise ExpressionError("atom root must be >= 2")
    key = (base, root, take_abs)
    gen = _atoms_by_key.get(key)
    if gen is not None:
        return gen
    with _lock:
        gen = _atoms_by_key.get(key)
        if gen is None:
            name = f"<{'abs ' if take_abs else ''}({base})^(1/{root})>"
            gen = Generator(len(_generators), name, root=root, base=base,
                            take_abs=take_abs)
            _generators.append(gen)
            _atoms_by_key[key] = gen
        return gen


def generator(index: int) -> Generator:
    return _generators[index]


# ---------------------------------------------------------------------------
# monomials: trimmed tuples of ints

_EMPTY = ()


def mono_from_gen(gen: Generator, exp: int = 1):
    m = [0] * (gen.index + 1)
    m[gen.index] = exp
    return tuple(m)


def mono_mul(a, b):
    if not a:
        return b
    if not b:
        return a
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for i, e in enumerate(b):
        out[i] += e
    while out and out[-1] == 0:
        out.pop()
    return tuple(out)


def mono_div(a, b):
    """a / b, or None if b does not divide a (entrywise)."""
    if not b:
        return a
    if len(b) > len(a):
        return None
    out = list(a)
    for i, e in enumerate(b):
        out[i] -= e
        if out[i] < 0:
            return None
    while out and out[-1] == 0:
        out.pop()
    return tuple(out)


def mono_gcd(a, b):
    n = min(len(a), len(b))
    out = [min(a[i], b[i]) for i in range(n)]
    while out and out[-1] == 0:
        out.pop()
    return tuple(out)


def mono_degree(m):
    return sum(m)


def mono_sort_key(m):
    return (sum(m), m)


def _mono_needs_fold(m):
    for i, e in enumerate(m):
        if e:
            g = _generators[i]
            if g.root > 1 and e >= g.root:
                return True
    return False


class Poly:
    """Immutable sparse polynomial: dict monomial -> nonzero mpq."""

    __slots__ = ("terms", "_hash")

    def __init__(self, terms: dict):
        self.terms = terms
        self._hash = None

    # -- constructors ----------------------------------------------------

    @staticmethod
    def const(value) -> "Poly":
        q = rat(value)
        return Poly({}) if q == 0 else Poly({_EMPTY: q})

    @staticmethod
    def from_gen(gen: Generator) -> "Poly":
        return Poly({mono_from_gen(gen): mpq(1)})

    @staticmethod
    def _make(terms: dict) -> "Poly":
        """Normalize a raw dict: drop zeros, fold over-unit atom exponents."""
        pending = None
        for m in terms:
            if _mono_needs_fold(m):
                pending = [] if pending is None else pending
                pending.append(m)
        if pending:
            terms = dict(terms)
            acc = Poly({m: c for m, c in terms.items()
                        if m not in set(pending)})
            for m in pending:
                acc = acc + _fold_term(m, terms[m])
            terms = acc.terms
            return Poly({m: c for m, c in terms.items() if c != 0})
        return Poly({m: c for m, c in terms.items() if c != 0})

    # -- predicates -------------------------------------------------------

    @property
    def is_zero(self):
        return not self.terms

    @property
    def is_one(self):
        return len(self.terms) == 1 and self.terms.get(_EMPTY) == 1

    @property
    def is_constant(self):
        return not self.terms or (len(self.terms) == 1 and _EMPTY in self.terms)

    def constant_value(self) -> mpq:
        if not self.terms:
            return mpq(0)
        if self.is_constant:
            return self.terms[_EMPTY]
        raise ExpressionError("not a constant polynomial")

    @property
    def is_monomial(self):
        return len(self.terms) == 1

    def gens(self):
        """Indices of generators that actually occur."""
        seen = set()
        for m in self.terms:
            for i, e in enumerate(m):
                if e:
                    seen.add(i)
        return seen

    def has_atoms(self):
        return any(_generators[i].root > 1 for i in self.gens())

    def degree_in(self, index: int) -> int:
        d = 0
        for m in self.terms:
            if len(m) > index and m[index] > d:
                d = m[index]
        return d

    def total_degree(self) -> int:
        return max((sum(m) for m in self.terms), default=0)

    def __len__(self):
        return len(self.terms)

    # -- equality / hashing ------------------------------------------------

    def __eq__(self, other):
        return isinstance(other, Poly) and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    # -- arithmetic ---------------------------------------------------------

    def __neg__(self):
        return Poly({m: -c for m, c in self.terms.items()})

    def __add__(self, other):
        if not isinstance(other, Poly):
            return NotImplemented
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        small, big = (self, other) if len(self.terms) <= len(other.terms) else (other, self)
        out = dict(big.terms)
        for m, c in small.terms.items():
            s = out.get(m)
            if s is None:
                out[m] = c
            else:
                s = s + c
                if s == 0:
                    del out[m]
                else:
                    out[m] = s
        return Poly(out)

    def __sub__(self, other):
        if not isinstance(other, Poly):
            return NotImplemented
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, Poly):
            return NotImplemented
        if self.is_zero or other.is_zero:
            return Poly({})
        if other.is_one:
            return self
        if self.is_one:
            return other
        out: dict = {}
        folded: list = []
        a_items = self.terms.items()
        b_items = list(other.terms.items())
        for ma, ca in a_items:
            for mb, cb in b_items:
                m = mono_mul(ma, mb)
                c = ca * cb
                if _mono_needs_fold(m):
                    folded.append((m, c))
                    continue
                s = out.get(m)
                if s is None:
                    out[m] = c
                else:
                    s = s + c
                    if s == 0:
                        del out[m]
                    else:
                        out[m] = s
        result = Poly(out)
        for m, c in folded:
            result = result + _fold_term(m, c)
        return result

    def scale(self, q) -> "Poly":
        q = rat(q)
        if q == 0:
            return Poly({})
        if q == 1:
            return self
        return Poly({m: c * q for m, c in self.terms.items()})

    def mul_mono(self, mono, coeff=1) -> "Poly":
        coeff = rat(coeff)
        out = {}
        folded = []
        for m, c in self.terms.items():
            mm = mono_mul(m, mono)
            cc = c * coeff
            if _mono_needs_fold(mm):
                folded.append((mm, cc))
            else:
                out[mm] = cc
        result = Poly(out)
        for m, c in folded:
            result = result + _fold_term(m, c)
        return result

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ExpressionError("Poly power expects a non-negative int")
        result = Poly.const(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base2 = base * base if n > 1 else base
            base, n = base2, n >> 1
        return result

    # -- structure ----------------------------------------------------------

    def diff_var_formal(self, index: int) -> "Poly":
        """Partial derivative w.r.t. an ordinary variable, atoms held fixed.

        Atom generators whose base involves the variable are NOT chased here;
        expression-level differentiation adds those chain-rule terms.
        """
        out = {}
        for m, c in self.terms.items():
            if len(m) <= index or m[index] == 0:
                continue
            e = m[index]
            mm = list(m)
            mm[index] = e - 1
            while mm and mm[-1] == 0:
                mm.pop()
            key = tuple(mm)
            s = out.get(key)
            cc = c * e
            out[key] = cc if s is None else s + cc
        return Poly({m: c for m, c in out.items() if c != 0})

    def coeffs_in(self, index: int) -> dict:
        """View as univariate in generator `index`: degree -> Poly coefficient."""
        out: dict[int, dict] = {}
        for m, c in self.terms.items():
            e = m[index] if len(m) > index else 0
            mm = list(m)
            if len(mm) > index:
                mm[index] = 0
            while mm and mm[-1] == 0:
                mm.pop()
            out.setdefault(e, {})[tuple(mm)] = c
        return {e: Poly(t) for e, t in out.items()}

    def leading(self):
        """(monomial, coeff) maximal in the fixed term order."""
        if self.is_zero:
            raise ExpressionError("zero polynomial has no leading term")
        m = max(self.terms, key=mono_sort_key)
        return m, self.terms[m]

    def content(self) -> mpq:
        """Positive rational c with self/c having integer, gcd-1 coefficients."""
        if self.is_zero:
            return mpq(1)
        num_gcd = 0
        den_lcm = 1
        for c in self.terms.values():
            num_gcd = _gcd_int(num_gcd, abs(int(c.numerator)))
            den_lcm = _lcm_int(den_lcm, int(c.denominator))
        return mpq(num_gcd, den_lcm)

    def mono_content(self):
        """Largest monomial dividing every term (atom gens excluded)."""
        it = iter(self.terms)
        try:
            g = next(it)
        except StopIteration:
            return _EMPTY
        for m in it:
            g = mono_gcd(g, m)
            if not g:
                return _EMPTY
        g = list(g)
        for i, e in enumerate(g):
            if e and _generators[i].root > 1:
                g[i] = 0
        while g and g[-1] == 0:
            g.pop()
        return tuple(g)

    def split_by_atoms(self):
        """Group terms by their atom part: {atom-monomial: atom-free Poly}."""
        out: dict[tuple, dict] = {}
        for m, c in self.terms.items():
            atom_part = [0] * len(m)
            var_part = list(m)
            mixed = False
            for i, e in enumerate(m):
                if e and _generators[i].root > 1:
                    atom_part[i] = e
                    var_part[i] = 0
                    mixed = True
            if not mixed:
                out.setdefault(_EMPTY, {})[m] = c
                continue
            while atom_part and atom_part[-1] == 0:
                atom_part.pop()
            while var_part and var_part[-1] == 0:
                var_part.pop()
            out.setdefault(tuple(atom_part), {})[tuple(var_part)] = c
        return {a: Poly(t) for a, t in out.items()}

    def __repr__(self):
        from .printer import poly_to_string
        return poly_to_string(self)


def _fold_term(mono, coeff) -> Poly:
    """Reduce atom exponents >= root in c*mono, multiplying bases back in."""
    residue = list(mono)
    extra = Poly.const(coeff)
    for i, e in enumerate(mono):
        if not e:
            continue
        g = _generators[i]
        if g.root > 1 and e >= g.root:
            k, r = divmod(e, g.root)
            residue[i] = r
            if g.base.is_constant:
                extra = extra.scale(g.base.constant_value() ** k)
            else:
                extra = extra * (g.base ** k)
    while residue and residue[-1] == 0:
        residue.pop()
    return extra.mul_mono(tuple(residue))


def _gcd_int(a, b):
    while b:
        a, b = b, a % b
    return a


def _lcm_int(a, b):
    return a // _gcd_int(a, b) * b


ZERO = Poly({})
ONE = Poly({_EMPTY: mpq(1)})


# ---------------------------------------------------------------------------
# gcd and exact division (atom-free polynomials only)


def divides(b: Poly, a: Poly):
    """Return a/b if b divides a exactly, else None.  Multivariate division."""
    if b.is_zero:
        return None
    if a.is_zero:
        return ZERO
    if b.is_one:
        return a
    if b.is_constant:
        return a.scale(1 / b.constant_value())
    lb, cb = b.leading()
    quo: dict = {}
    rem = a
    # bound the loop by term count growth; each step kills rem's leading term
    while not rem.is_zero:
        lm, lc = rem.leading()
        m = mono_div(lm, lb)
        if m is None:
            return None
        c = lc / cb
        quo[m] = quo.get(m, mpq(0)) + c
        rem = rem - b.mul_mono(m, c)
    return Poly({m: c for m, c in quo.items() if c != 0})


def _poly_primitive(p: Poly):
    """(content, primitive) with primitive having positive leading coeff."""
    if p.is_zero:
        return mpq(1), p
    c = p.content()
    _, lead = p.leading()
    if lead < 0:
        c = -c
    return c, p.scale(1 / c)


def _content_wrt(p: Poly, v: int):
    """gcd of the coefficients of p viewed as univariate in v."""
    coeffs = list(p.coeffs_in(v).values())
    g = coeffs[0]
    for q in coeffs[1:]:
        g = poly_gcd(g, q)
        if g.is_constant:
            return ONE
    _, g = _poly_primitive(g)
    return g


def _pseudo_rem(a: Poly, b: Poly, v: int) -> Poly:
    """Pseudo-remainder of a by b in the variable v."""
    db = b.degree_in(v)
    lead_b = b.coeffs_in(v).get(db, ZERO)
    rem = a
    while True:
        da = rem.degree_in(v)
        if rem.is_zero or da < db:
            return rem
        lead_a = rem.coeffs_in(v).get(da, ZERO)
        shift = mono_from_gen(_generators[v], da - db)
        rem = rem * lead_b - b * lead_a.mul_mono(shift)


def poly_gcd(a: Poly, b: Poly) -> Poly:
    """gcd in Q[vars], normalized primitive with positive leading coefficient.

    Atoms must not occur (callers reduce to the atom-free case first).
    Strategy: cheap probes, then heuristic gcd (integer evaluation with
    balanced radix reconstruction, verified by trial division), falling back
    to a primitive PRS.
    """
    if a.is_zero:
        return _poly_primitive(b)[1] if not b.is_zero else ZERO
    if b.is_zero:
        return _poly_primitive(a)[1]
    if a.is_constant or b.is_constant:
        return ONE
    if a.terms == b.terms:
        return _poly_primitive(a)[1]
    # common monomial factor out front
    ma, mb = a.mono_content(), b.mono_content()
    mg = mono_gcd(ma, mb)
    if ma != _EMPTY or mb != _EMPTY:
        a = divides(Poly({ma: mpq(1)}), a)
        b = divides(Poly({mb: mpq(1)}), b)
        if a.is_constant or b.is_constant:
            return Poly({mg: mpq(1)}) if mg else ONE
    _, a = _poly_primitive(a)
    _, b = _poly_primitive(b)
    mono_part = Poly({mg: mpq(1)}) if mg else ONE
    # cheap probes: exact divisibility
    if len(a.terms) <= len(b.terms) and divides(a, b) is not None:
        return mono_part * a
    if len(b.terms) < len(a.terms) and divides(b, a) is not None:
        return mono_part * b
    common = a.gens() & b.gens()
    common = [v for v in common if _generators[v].root == 1]
    if not common:
        return mono_part
    g = _heuristic_gcd(a, b)
    if g is None:
        v = min(common, key=lambda i: min(a.degree_in(i), b.degree_in(i)))
        ca, cb = _content_wrt(a, v), _content_wrt(b, v)
        cont = poly_gcd(ca, cb)
        pa = divides(ca, a) if not ca.is_one else a
        pb = divides(cb, b) if not cb.is_one else b
        g = cont * _prs_gcd(pa, pb, v)
    return mono_part * g


# -- heuristic gcd ----------------------------------------------------------


def _maxnorm(p: Poly) -> int:
    return max(abs(int(c.numerator)) for c in p.terms.values())


def _eval_at(p: Poly, v: int, xi) -> Poly:
    """Substitute the integer xi for generator v (coefficients stay exact)."""
    out: dict = {}
    powers = {0: mpq(1)}
    for m, c in p.terms.items():
        e = m[v] if len(m) > v else 0
        if e not in powers:
            powers[e] = mpq(xi) ** e
        mm = list(m)
        if len(mm) > v:
            mm[v] = 0
        while mm and mm[-1] == 0:
            mm.pop()
        key = tuple(mm)
        val = c * powers[e]
        acc = out.get(key)
        if acc is None:
            out[key] = val
        else:
            acc = acc + val
            if acc == 0:
                del out[key]
            else:
                out[key] = acc
    return Poly(out)


def _balanced_digit(c: mpq, xi) -> mpq:
    r = int(c.numerator) % xi
    if 2 * r > xi:
        r -= xi
    return mpq(r)


def _interpolate(h: Poly, v: int, xi) -> Poly:
    """Rebuild a polynomial in generator v from its value at xi (balanced digits)."""
    result: dict = {}
    current = h
    k = 0
    while not current.is_zero:
        digits = {}
        rest = {}
        for m, c in current.terms.items():
            d = _balanced_digit(c, xi)
            if d != 0:
                mm = list(m)
                while len(mm) <= v:
                    mm.append(0)
                mm[v] += k
                while mm and mm[-1] == 0:
                    mm.pop()
                result[tuple(mm)] = d
            rem = (c - d) / xi
            if rem != 0:
                rest[m] = rem
        current = Poly(rest)
        k += 1
        if k > 4000:
            return None
    return Poly(result)


def _heuristic_gcd(a: Poly, b: Poly, depth: int = 0):
    """Heuristic gcd of primitive integer polynomials; None on failure.

    Correct whenever it returns: the candidate is kept only if it divides
    both inputs exactly.
    """
    if depth > 32:
        return None
    # integer coefficients assumed (inputs are primitive)
    common = sorted(a.gens() & b.gens())
    common = [v for v in common if _generators[v].root == 1]
    if not common:
        return ONE
    v = max(common, key=lambda i: min(a.degree_in(i), b.degree_in(i)))
    xi = 2 * min(_maxnorm(a), _maxnorm(b)) + 29
    for _ in range(6):
        if xi.bit_length() * max(a.degree_in(v), b.degree_in(v)) > 600000:
            return None
        fa = _eval_at(a, v, xi)
        fb = _eval_at(b, v, xi)
        if fa.is_constant and fb.is_constant:
            na, nb = int(fa.constant_value()), int(fb.constant_value())
            h = Poly.const(_gcd_int(abs(na), abs(nb)))
        else:
            h = _heuristic_gcd(_int_content_removed(fa), _int_content_removed(fb),
                               depth + 1)
        if h is not None:
            cand = _interpolate(h, v, xi)
            if cand is not None and not cand.is_zero:
                cand = _poly_primitive(cand)[1]
                if divides(cand, a) is not None and divides(cand, b) is not None:
                    return cand
        xi = xi * 73794 // 27011
        if xi % 2 == 0:
            xi += 1
    return None


def _int_content_removed(p: Poly) -> Poly:
    if p.is_zero:
        return p
    return _poly_primitive(p)[1]


def _prs_gcd(a: Poly, b: Poly, v: int) -> Poly:
    """Primitive PRS gcd of primitive-in-v polynomials."""
    if a.degree_in(v) < b.degree_in(v):
        a, b = b, a
    while True:
        r = _pseudo_rem(a, b, v)
        if r.is_zero:
            _, pb = _poly_primitive(b)
            return pb
        if r.degree_in(v) == 0:
            return ONE
        c = _content_wrt(r, v)
        if not c.is_one:
            r = divides(c, r)
        _, r = _poly_primitive(r)
        a, b = b, r
