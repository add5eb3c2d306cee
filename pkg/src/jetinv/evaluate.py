"""Evaluation of expressions: exact rational, floating, formal-radical, grid.

The formal-radical evaluator backs randomized identity testing: at an exact
rational point every radical atom stays a formal symbol s with the single
relation s**root = (value of its base).  Identities that hold in the radical
extension of the function field evaluate to the formal zero, so per-point
zero testing keeps Schwartz-Zippel soundness.
"""

from __future__ import annotations

import random

import gmpy2
import numpy as np
from gmpy2 import mpq

from .errors import EvaluationError, SamplingError
from .expression import Expression, as_expression
from .poly import Poly, generator, rat, variable

# ---------------------------------------------------------------------------
# bindings


def _binding_table(binding) -> dict:
    table = {}
    for key, value in binding.items():
        if isinstance(key, str):
            idx = variable(key).index
        elif hasattr(key, "index"):
            idx = key.index
        else:
            idx = key
        table[idx] = value
    return table


# ---------------------------------------------------------------------------
# exact evaluation


def eval_exact(e, binding, absolute=False) -> mpq:
    """Exact rational value; raises if a radical does not come out rational.

    With absolute=True every radical base is replaced by its absolute value
    (the caller selects absolute-value semantics); otherwise only atoms
    created from abs(...) take absolute values and a negative base under a
    strict radical is an error.
    """
    e = as_expression(e)
    table = {k: rat(v) for k, v in _binding_table(binding).items()}
    den = _eval_poly_exact(e.den, table, absolute)
    if den == 0:
        raise EvaluationError("division by zero at evaluation point")
    return _eval_poly_exact(e.num, table, absolute) / den


def _eval_poly_exact(p: Poly, table: dict, absolute: bool) -> mpq:
    total = mpq(0)
    cache: dict = {}
    for mono, c in p.terms.items():
        v = c
        for i, exp in enumerate(mono):
            if exp:
                v = v * _gen_value_exact(i, exp, table, cache, absolute)
        total += v
    return total


def _gen_value_exact(idx, exp, table, cache, absolute) -> mpq:
    key = (idx, exp)
    hit = cache.get(key)
    if hit is not None:
        return hit
    gen = generator(idx)
    if gen.is_atom:
        base = _eval_poly_exact(gen.base, table, absolute)
        if gen.take_abs or absolute:
            base = abs(base)
        elif base < 0:
            raise EvaluationError(
                "negative base under rational power in strict mode")
        value = _exact_root(base, exp, gen.root)
    else:
        if idx not in table:
            raise EvaluationError(f"unbound variable {gen.name!r}")
        value = table[idx] ** exp
    cache[key] = value
    return value


def _exact_root(base: mpq, exp: int, root: int) -> mpq:
    if base == 0:
        return mpq(0)
    powered = base ** exp
    nr, n_ok = gmpy2.iroot(abs(powered.numerator), root)
    dr, d_ok = gmpy2.iroot(powered.denominator, root)
    if not (n_ok and d_ok) or powered < 0:
        raise EvaluationError("radical does not evaluate to an exact rational")
    return mpq(int(nr), int(dr))


# ---------------------------------------------------------------------------
# floating evaluation


def eval_float(e, binding, absolute=False) -> float:
    e = as_expression(e)
    table = {k: float(v) for k, v in _binding_table(binding).items()}
    den = _eval_poly_float(e.den, table, absolute)
    if den == 0.0:
        raise EvaluationError("division by zero at evaluation point")
    return _eval_poly_float(e.num, table, absolute) / den


def _eval_poly_float(p: Poly, table: dict, absolute: bool) -> float:
    total = 0.0
    cache: dict = {}
    for mono, c in p.terms.items():
        v = float(c)
        for i, exp in enumerate(mono):
            if exp:
                v *= _gen_value_float(i, exp, table, cache, absolute)
        total += v
    return total


def _gen_value_float(idx, exp, table, cache, absolute) -> float:
    key = (idx, exp)
    hit = cache.get(key)
    if hit is not None:
        return hit
    gen = generator(idx)
    if gen.is_atom:
        base = _eval_poly_float(gen.base, table, absolute)
        if gen.take_abs or absolute:
            base = abs(base)
        elif base < 0:
            raise EvaluationError(
                "negative base under rational power in strict mode")
        value = base ** (exp / gen.root)
    else:
        if idx not in table:
            raise EvaluationError(f"unbound variable {gen.name!r}")
        value = table[idx] ** exp
    cache[key] = value
    return value


def evaluate(e, binding, absolute=False):
    """Exact result for all-rational bindings, float otherwise.

    Rational bindings fall back to float when a radical is irrational.
    """
    values = list(_binding_table(binding).values())
    exactable = all(not isinstance(v, float) for v in values)
    if exactable:
        try:
            return eval_exact(e, binding, absolute=absolute)
        except EvaluationError as err:
            if "irrational" not in str(err) and "exact rational" not in str(err):
                raise
    return eval_float(e, binding, absolute=absolute)


# ---------------------------------------------------------------------------
# formal-radical evaluation


class RadicalContext:
    """Relation table for formal radicals at one evaluation point."""

    def __init__(self):
        self.relations: dict[int, mpq] = {}

    def register(self, atom_idx: int, base_value: mpq):
        gen = generator(atom_idx)
        value = abs(base_value) if gen.take_abs else base_value
        known = self.relations.get(atom_idx)
        if known is None:
            self.relations[atom_idx] = value
        elif known != value:
            raise EvaluationError("inconsistent radical relation")

    def zero(self):
        return RadicalNumber(self, {})

    def const(self, q):
        q = rat(q)
        return RadicalNumber(self, {(): q} if q != 0 else {})


class RadicalNumber:
    """Exact value in Q adjoined formal radicals: dict {radical-mono: mpq}."""

    __slots__ = ("ctx", "terms")

    def __init__(self, ctx, terms):
        self.ctx = ctx
        self.terms = terms

    @property
    def is_zero(self):
        return not self.terms

    def is_rational(self):
        return not self.terms or (len(self.terms) == 1 and () in self.terms)

    def rational_value(self) -> mpq:
        if self.is_zero:
            return mpq(0)
        if self.is_rational():
            return self.terms[()]
        raise EvaluationError("value involves an unresolved radical")

    def __eq__(self, other):
        return isinstance(other, RadicalNumber) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __add__(self, other):
        out = dict(self.terms)
        for m, c in other.terms.items():
            s = out.get(m)
            if s is None:
                out[m] = c
            else:
                s = s + c
                if s == 0:
                    del out[m]
                else:
                    out[m] = s
        return RadicalNumber(self.ctx, out)

    def __neg__(self):
        return RadicalNumber(self.ctx, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        out: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m, extra = _radical_mono_mul(self.ctx, m1, m2)
                c = c1 * c2 * extra
                s = out.get(m)
                if s is None:
                    out[m] = c
                else:
                    s = s + c
                    if s == 0:
                        del out[m]
                    else:
                        out[m] = s
        return RadicalNumber(self.ctx, out)

    def scale(self, q):
        q = rat(q)
        if q == 0:
            return RadicalNumber(self.ctx, {})
        return RadicalNumber(self.ctx, {m: c * q for m, c in self.terms.items()})

    def __repr__(self):
        if self.is_zero:
            return "RadicalNumber(0)"
        parts = []
        for m, c in sorted(self.terms.items()):
            factors = [str(c)] + [f"r{i}^{e}" for i, e in m]
            parts.append("*".join(factors))
        return "RadicalNumber(" + " + ".join(parts) + ")"


def _radical_mono_mul(ctx, m1, m2):
    merged = dict(m1)
    for i, e in m2:
        merged[i] = merged.get(i, 0) + e
    extra = mpq(1)
    reduced = []
    for i, e in sorted(merged.items()):
        root = generator(i).root
        k, r = divmod(e, root)
        if k:
            extra *= ctx.relations[i] ** k
        if r:
            reduced.append((i, r))
    return tuple(reduced), extra


def eval_radical(e, binding, ctx: RadicalContext | None = None) -> RadicalNumber:
    """Exact evaluation keeping radicals formal (atoms become symbols)."""
    e = as_expression(e)
    if ctx is None:
        ctx = RadicalContext()
    table = {k: rat(v) for k, v in _binding_table(binding).items()}
    den = _eval_poly_exact(e.den, table, absolute=False)
    if den == 0:
        raise EvaluationError("division by zero at evaluation point")
    num = _eval_poly_radical(e.num, table, ctx)
    return num.scale(1 / den)


def _eval_poly_radical(p: Poly, table, ctx) -> RadicalNumber:
    total = ctx.zero()
    for mono, c in p.terms.items():
        coeff = c
        radical_part = []
        for i, exp in enumerate(mono):
            if not exp:
                continue
            gen = generator(i)
            if gen.is_atom:
                base_val = _eval_poly_exact(gen.base, table, absolute=False)
                ctx.register(i, base_val)
                radical_part.append((i, exp))
            else:
                if i not in table:
                    raise EvaluationError(f"unbound variable {gen.name!r}")
                coeff = coeff * table[i] ** exp
        term = RadicalNumber(ctx, {(): coeff} if coeff != 0 else {})
        if radical_part:
            term = term * RadicalNumber(ctx, {tuple(radical_part): mpq(1)})
        total = total + term
    return total


# ---------------------------------------------------------------------------
# equality tests


def canonical_equal(e1, e2) -> bool:
    """Exact equality of canonical forms."""
    return as_expression(e1) == as_expression(e2)


def random_rational(rng: random.Random) -> mpq:
    return mpq(rng.randint(-9, 9), rng.randint(1, 4))


def sample_point(names, rng: random.Random) -> dict:
    return {name: random_rational(rng) for name in names}


def probabilistic_equal(e1, e2, trials=100, rng=None) -> bool:
    """Schwartz-Zippel style equality: exact evaluation at random points.

    Returns True iff e1 - e2 evaluates to exactly zero at `trials` admissible
    random rational points (points hitting a zero denominator are resampled).
    Raises SamplingError when admissible points cannot be found.
    """
    e1 = as_expression(e1)
    e2 = as_expression(e2)
    if e1 == e2:
        return True
    rng = rng if rng is not None else random.Random(0x5EED)
    names = sorted(e1.variables() | e2.variables())
    done = 0
    attempts = 0
    limit = 50 * max(trials, 1) + 50
    while done < trials:
        if attempts >= limit:
            raise SamplingError(
                "unable to sample: admissible points not found "
                f"({done}/{trials} trials completed)")
        attempts += 1
        point = sample_point(names, rng)
        ctx = RadicalContext()
        try:
            v1 = eval_radical(e1, point, ctx)
            v2 = eval_radical(e2, point, ctx)
        except EvaluationError:
            continue
        if v1 != v2:
            return False
        done += 1
    return True


# ---------------------------------------------------------------------------
# vectorized grid evaluation


def eval_grid(e, arrays: dict, absolute=False) -> np.ndarray:
    """Evaluate over numpy arrays of coordinates (names -> arrays).

    Radical atoms evaluate as |base|**q when marked abs (or absolute=True);
    strict radicals over negative bases yield NaN.
    """
    e = as_expression(e)
    table = {}
    shape = None
    for key, value in arrays.items():
        idx = variable(key).index if isinstance(key, str) else key.index
        arr = np.asarray(value, dtype=float)
        table[idx] = arr
        shape = arr.shape if shape is None else np.broadcast_shapes(shape, arr.shape)
    cache: dict = {}
    num = _eval_poly_grid(e.num, table, cache, shape, absolute)
    den = _eval_poly_grid(e.den, table, cache, shape, absolute)
    with np.errstate(divide="ignore", invalid="ignore"):
        return num / den


def _eval_poly_grid(p: Poly, table, cache, shape, absolute) -> np.ndarray:
    total = np.zeros(shape if shape is not None else ())
    for mono, c in p.terms.items():
        v = np.full(shape if shape is not None else (), float(c))
        for i, exp in enumerate(mono):
            if exp:
                v = v * _gen_grid(i, exp, table, cache, shape, absolute)
        total = total + v
    return total


def _gen_grid(idx, exp, table, cache, shape, absolute) -> np.ndarray:
    key = (idx, exp)
    hit = cache.get(key)
    if hit is not None:
        return hit
    gen = generator(idx)
    if gen.is_atom:
        base = _eval_poly_grid(gen.base, table, cache, shape, absolute)
        if gen.take_abs or absolute:
            base = np.abs(base)
        else:
            base = np.where(base < 0, np.nan, base)
        with np.errstate(invalid="ignore"):
            value = base ** (exp / gen.root)
    else:
        if idx not in table:
            raise EvaluationError(f"unbound variable {gen.name!r}")
        value = table[idx] ** exp
    cache[key] = value
    return value
