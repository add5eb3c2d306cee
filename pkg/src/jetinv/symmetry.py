"""The 8-dimensional projective symmetry algebra on the (x, y) plane.

Elements are parametrized by (a0, b0, a11, a12, a21, a22, c1, c2), inducing
the point field

    (a0 + a11*x + a12*y) d_x + (b0 + a21*x + a22*y) d_y
    + (c1*x + c2*y) * (x d_x + y d_y).

With formal parameters one lifted field covers the whole connected group, so
each invariance identity is a single canonical zero test.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ExpressionError
from .expression import EXPR_ZERO, Expression, as_expression, substitute
from .jets import Bundle, LiftedField, prolong_contact
from .linalg import in_span, rank
from .poly import variable
from .parser import parse

PARAM_NAMES = ("a0", "b0", "a11", "a12", "a21", "a22", "c1", "c2")


@dataclass(frozen=True)
class AlgebraElement:
    """One element, given by its eight parameter values (exact expressions)."""

    params: tuple

    @staticmethod
    def from_values(**kwargs) -> "AlgebraElement":
        unknown = set(kwargs) - set(PARAM_NAMES)
        if unknown:
            raise ExpressionError(f"unknown parameters {sorted(unknown)}")
        vals = tuple(as_expression(kwargs.get(name, 0)) for name in PARAM_NAMES)
        return AlgebraElement(vals)

    def param(self, name: str) -> Expression:
        return self.params[PARAM_NAMES.index(name)]

    def point_field(self) -> tuple[Expression, Expression]:
        a0, b0, a11, a12, a21, a22, c1, c2 = self.params
        x = Expression.var("x")
        y = Expression.var("y")
        radial = c1 * x + c2 * y
        xi = a0 + a11 * x + a12 * y + radial * x
        eta = b0 + a21 * x + a22 * y + radial * y
        return xi, eta

    def is_zero(self) -> bool:
        return all(p.is_zero for p in self.params)


def basis() -> list[AlgebraElement]:
    """The eight coordinate fields (one parameter set to 1)."""
    out = []
    for name in PARAM_NAMES:
        out.append(AlgebraElement.from_values(**{name: 1}))
    return out


def generic_element() -> AlgebraElement:
    """Element with formal parameters; linear in them, covers the whole algebra."""
    return AlgebraElement(tuple(Expression.var(n) for n in PARAM_NAMES))


def lift(element: AlgebraElement, bundle: Bundle) -> LiftedField:
    xi, eta = element.point_field()
    return LiftedField(bundle, *prolong_contact(xi, eta))


_generic_lifts: dict[int, LiftedField] = {}


def generic_lift(bundle: Bundle) -> LiftedField:
    """Cached lift of the generic element to the given bundle."""
    key = id(bundle)
    got = _generic_lifts.get(key)
    if got is None:
        got = lift(generic_element(), bundle)
        _generic_lifts[key] = got
    return got


# ---------------------------------------------------------------------------
# brackets and decomposition


def bracket_fields(f1, f2):
    """Bracket of two point fields given as (xi, eta) pairs."""
    from .expression import partial

    def apply(field, h):
        xi, eta = field
        return xi * partial(h, "x") + eta * partial(h, "y")

    xi = apply(f1, f2[0]) - apply(f2, f1[0])
    eta = apply(f1, f2[1]) - apply(f2, f1[1])
    return xi, eta


def decompose(xi, eta) -> AlgebraElement:
    """Write a point field in the eight parameters; raises if not in the algebra."""
    xi = as_expression(xi)
    eta = as_expression(eta)
    cx = _plane_coeffs(xi)
    cy = _plane_coeffs(eta)
    params = {
        "a0": cx.pop((0, 0), EXPR_ZERO),
        "a11": cx.pop((1, 0), EXPR_ZERO),
        "a12": cx.pop((0, 1), EXPR_ZERO),
        "b0": cy.pop((0, 0), EXPR_ZERO),
        "a21": cy.pop((1, 0), EXPR_ZERO),
        "a22": cy.pop((0, 1), EXPR_ZERO),
        "c1": cx.pop((2, 0), EXPR_ZERO),
        "c2": cx.pop((1, 1), EXPR_ZERO),
    }
    consistent = (cx == {}
                  and cy.pop((1, 1), EXPR_ZERO) == params["c1"]
                  and cy.pop((0, 2), EXPR_ZERO) == params["c2"]
                  and cy == {})
    if not consistent:
        raise ExpressionError("point field is not in the symmetry algebra")
    return AlgebraElement(tuple(params[name] for name in PARAM_NAMES))


def _plane_coeffs(e: Expression) -> dict:
    """Coefficients of a polynomial in x, y (coefficients may hold parameters)."""
    if not e.den.is_one:
        raise ExpressionError("expected a polynomial in x, y")
    ix = variable("x").index
    iy = variable("y").index
    out: dict[tuple[int, int], Expression] = {}
    from .poly import Poly
    buckets: dict[tuple[int, int], dict] = {}
    for mono, c in e.num.terms.items():
        dx = mono[ix] if len(mono) > ix else 0
        dy = mono[iy] if len(mono) > iy else 0
        rest = list(mono)
        if len(rest) > ix:
            rest[ix] = 0
        if len(rest) > iy:
            rest[iy] = 0
        while rest and rest[-1] == 0:
            rest.pop()
        buckets.setdefault((dx, dy), {})[tuple(rest)] = c
    for key, terms in buckets.items():
        out[key] = Expression.from_poly(Poly(terms))
    return out


def bracket(e1: AlgebraElement, e2: AlgebraElement) -> AlgebraElement:
    return decompose(*bracket_fields(e1.point_field(), e2.point_field()))


# ---------------------------------------------------------------------------
# invariance checks


def check_relative(f, weight, bundle: Bundle, lifted: LiftedField | None = None) -> bool:
    """Does the generic lifted field satisfy L(f) = weight * f?"""
    lifted = lifted if lifted is not None else generic_lift(bundle)
    f = as_expression(f)
    return (lifted.apply(f) - as_expression(weight) * f).is_zero


def check_absolute(i, bundle: Bundle, lifted: LiftedField | None = None) -> bool:
    """Is the expression annihilated by the generic lifted field?"""
    lifted = lifted if lifted is not None else generic_lift(bundle)
    return lifted.apply(as_expression(i)).is_zero


def computed_weight(f, bundle: Bundle, lifted: LiftedField | None = None) -> Expression:
    """L(f)/f as an expression: the weight when f is a relative invariant."""
    lifted = lifted if lifted is not None else generic_lift(bundle)
    f = as_expression(f)
    return lifted.apply(f) / f


def specialize_weight(weight, element: AlgebraElement) -> Expression:
    """Substitute a concrete element's parameters into a generic weight."""
    mapping = {variable(name).index: element.params[i]
               for i, name in enumerate(PARAM_NAMES)}
    return substitute(as_expression(weight), mapping)


def check_weight_cocycle(weight, bundle: Bundle) -> bool:
    """mu([X,Y]) = X^(mu_Y) - Y^(mu_X) over all pairs of basis elements."""
    weight = as_expression(weight)
    elems = basis()
    lifts = [lift(e, bundle) for e in elems]
    mus = [specialize_weight(weight, e) for e in elems]
    for i in range(len(elems)):
        for j in range(i + 1, len(elems)):
            br = bracket(elems[i], elems[j])
            lhs = specialize_weight(weight, br)
            rhs = lifts[i].apply(mus[j]) - lifts[j].apply(mus[i])
            if not (lhs - rhs).is_zero:
                return False
    return True


# ---------------------------------------------------------------------------
# rational span of weights


def weight_vectors(weights):
    """Coefficient vectors of weight expressions over their joint monomials."""
    weights = [as_expression(w) for w in weights]
    for w in weights:
        if not w.den.is_one:
            raise ExpressionError("weights must be polynomial")
    monomials = sorted({m for w in weights for m in w.num.terms},
                       key=lambda m: (len(m), m))
    index = {m: i for i, m in enumerate(monomials)}
    from gmpy2 import mpq
    vectors = []
    for w in weights:
        vec = [mpq(0)] * len(monomials)
        for m, c in w.num.terms.items():
            vec[index[m]] = c
        vectors.append(vec)
    return vectors


def weights_spanned_by(weights, generators) -> bool:
    """Every weight lies in the Q-span of the generator weights."""
    all_vecs = weight_vectors(list(generators) + list(weights))
    gen_vecs = all_vecs[: len(generators)]
    for vec in all_vecs[len(generators):]:
        if not in_span(gen_vecs, vec):
            return False
    return True


def weights_rank(weights) -> int:
    return rank(weight_vectors(weights))
