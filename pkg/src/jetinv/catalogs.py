"""Shared catalog structures: invariant entries and total derivations."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ExpressionError
from .expression import EXPR_ZERO, Expression, as_expression, partial
from .jets import Bundle


@dataclass(frozen=True)
class InvariantEntry:
    """Catalog record for one differential invariant."""

    name: str
    bundle_tag: str            # "pi" (curve families) or "pitilde" (ODE)
    order: int
    expression: Expression
    kind: str                  # "relative" | "absolute"
    weight: Expression | None  # for relative entries


@dataclass(frozen=True)
class TotalDerivation:
    """A * d/dx + B * d/dy + C * d/dp with jet-expression coefficients."""

    bundle: Bundle
    a: Expression
    b: Expression
    c: Expression

    @property
    def coefficients(self):
        return (self.a, self.b, self.c)

    def apply(self, e) -> Expression:
        e = as_expression(e)
        out = EXPR_ZERO
        for coef, v in ((self.a, "x"), (self.b, "y"), (self.c, "p")):
            if not coef.is_zero:
                out = out + coef * self.bundle.total_derivative(e, v)
        return out

    def of_coordinate(self, name: str) -> Expression:
        """Value on a base coordinate: the matching coefficient."""
        try:
            return {"x": self.a, "y": self.b, "p": self.c}[name]
        except KeyError:
            raise ExpressionError(f"not a base coordinate: {name!r}") from None


def derivation_bracket(d1: TotalDerivation, d2: TotalDerivation) -> TotalDerivation:
    """[d1, d2] as a total derivation (total derivatives commute)."""
    coeffs = tuple(d1.apply(c2) - d2.apply(c1)
                   for c1, c2 in zip(d1.coefficients, d2.coefficients))
    return TotalDerivation(d1.bundle, *coeffs)


def derivation_combination(terms, bundle: Bundle) -> TotalDerivation:
    """sum of coef * derivation over (coef, derivation) pairs."""
    acc = [EXPR_ZERO, EXPR_ZERO, EXPR_ZERO]
    for coef, nabla in terms:
        coef = as_expression(coef)
        for i, c in enumerate(nabla.coefficients):
            acc[i] = acc[i] + coef * c
    return TotalDerivation(bundle, *acc)


def derivations_equal(d1: TotalDerivation, d2: TotalDerivation) -> bool:
    return all((c1 - c2).is_zero
               for c1, c2 in zip(d1.coefficients, d2.coefficients))


def jet_coefficient_matrix(functions, jet_vars):
    """Rows: coefficient of each jet variable in each (affine) function.

    Raises if any function is not affine in the given variables.
    """
    matrix = []
    for func in functions:
        row = []
        for v in jet_vars:
            c = partial(func, v)
            for w in jet_vars:
                if not partial(c, w).is_zero:
                    raise ExpressionError(
                        "function is not affine in the top-order jets")
            row.append(c)
        matrix.append(row)
    return matrix
