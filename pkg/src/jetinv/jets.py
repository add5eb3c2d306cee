"""Jet-space bookkeeping over the base (x, y, p).

Two bundles occur: fiber functions (f, g) for 2-parameter curve families, and
the single fiber function (f) for second-order ODEs y'' = f(x, y, y').  Jet
coordinates are named f, f_x, f_px, g_pp, ... with the multi-index spelled as
a sorted string over {p, x, y}, so f_xy and f_yx are the same variable.

Supplies total derivatives, contact prolongation of point fields, recursive
prolongation of fields on R^3 to jets, and restriction of jet expressions to
concrete sections.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ExpressionError, OrderBudgetError
from .expression import (EXPR_ONE, EXPR_ZERO, Expression, as_expression,
                         derive, partial, substitute)
from .poly import generator, variable

BASE_NAMES = ("x", "y", "p")


def jet_name(func: str, multi: str) -> str:
    return func if not multi else f"{func}_{''.join(sorted(multi))}"


class Bundle:
    """A jet bundle over (x, y, p) with a fixed order budget."""

    def __init__(self, fibers=("f", "g"), order=4):
        self.fibers = tuple(fibers)
        self.order = order
        self.base_vars = tuple(variable(n) for n in BASE_NAMES)
        self.jet_vars: dict[tuple[str, str], object] = {}
        self.jet_info: dict[int, tuple[str, str]] = {}
        for func in self.fibers:
            for k in range(order + 1):
                for multi in _multis(k):
                    gen = variable(jet_name(func, multi))
                    self.jet_vars[(func, multi)] = gen
                    self.jet_info[gen.index] = (func, multi)
        self._velocity_cache: dict[str, dict] = {}

    # -- coordinates -------------------------------------------------------

    def jet(self, func: str, multi: str = "") -> Expression:
        multi = "".join(sorted(multi))
        gen = self.jet_vars.get((func, multi))
        if gen is None:
            raise OrderBudgetError(
                f"jet {jet_name(func, multi)} exceeds order budget {self.order}")
        return Expression.var(gen.name)

    def var(self, name: str) -> Expression:
        return Expression.var(name)

    def variable_names(self):
        names = list(BASE_NAMES)
        names += [jet_name(f, m) for (f, m) in self.jet_vars]
        return names

    # -- inspection -----------------------------------------------------------

    def jet_order(self, e) -> int:
        """Maximal jet order occurring in e (atoms included), -1 if none."""
        e = as_expression(e)
        top = -1
        stack = [e.num, e.den]
        while stack:
            p = stack.pop()
            for i in p.gens():
                gen = generator(i)
                if gen.is_atom:
                    stack.append(gen.base)
                else:
                    info = self.jet_info.get(i)
                    if info is not None and len(info[1]) > top:
                        top = len(info[1])
        return top

    # -- total derivatives ------------------------------------------------------

    def _velocity(self, v: str) -> dict:
        table = self._velocity_cache.get(v)
        if table is None:
            table = {variable(v).index: EXPR_ONE}
            for (func, multi), gen in self.jet_vars.items():
                if len(multi) < self.order:
                    table[gen.index] = Expression.var(
                        jet_name(func, "".join(sorted(multi + v))))
            self._velocity_cache[v] = table
        return table

    def total_derivative(self, e, v: str) -> Expression:
        """d/dv on jet expressions; output order = input order + 1."""
        if v not in BASE_NAMES:
            raise ExpressionError(f"total derivative needs a base coordinate, got {v!r}")
        e = as_expression(e)
        if self.jet_order(e) >= self.order:
            raise OrderBudgetError(
                f"total derivative would exceed order budget {self.order}")
        return derive(e, self._velocity(v))

    def restrict_to_section(self, e, section: "Section") -> Expression:
        """Substitute the section's derivatives for every jet coordinate."""
        e = as_expression(e)
        cache: dict[tuple[str, str], Expression] = {}

        def section_jet(func, multi):
            hit = cache.get((func, multi))
            if hit is not None:
                return hit
            if not multi:
                value = section.component(func)
            else:
                value = partial(section_jet(func, multi[:-1]), multi[-1])
            cache[(func, multi)] = value
            return value

        mapping = {}
        for i in _all_gens(e):
            info = self.jet_info.get(i)
            if info is not None:
                mapping[i] = section_jet(info[0], info[1])
        return substitute(e, mapping)


def _multis(k: int):
    """Sorted multi-index strings of order k over p < x < y."""
    if k == 0:
        return [""]
    out = []
    for np_ in range(k + 1):
        for nx in range(k - np_ + 1):
            ny = k - np_ - nx
            out.append("p" * np_ + "x" * nx + "y" * ny)
    return out


def _all_gens(e: Expression):
    seen = set()
    stack = [e.num, e.den]
    while stack:
        p = stack.pop()
        for i in p.gens():
            if i in seen:
                continue
            seen.add(i)
            gen = generator(i)
            if gen.is_atom:
                stack.append(gen.base)
    return seen


@dataclass(frozen=True)
class Section:
    """A concrete section: one expression per fiber function, in (x, y, p)."""

    f: Expression
    g: Expression | None = None

    def component(self, func: str) -> Expression:
        if func == "f":
            return self.f
        if func == "g" and self.g is not None:
            return self.g
        raise ExpressionError(f"section has no component {func!r}")

    @staticmethod
    def for_ode(f) -> "Section":
        return Section(f=as_expression(f), g=None)

    @staticmethod
    def for_family(f, g) -> "Section":
        return Section(f=as_expression(f), g=as_expression(g))


def prolong_contact(xi, eta) -> tuple[Expression, Expression, Expression]:
    """First prolongation of a point field xi*d_x + eta*d_y to (x, y, p)."""
    xi = as_expression(xi)
    eta = as_expression(eta)
    p = Expression.var("p")
    for comp in (xi, eta):
        if not partial(comp, "p").is_zero:
            raise ExpressionError("point field components must not depend on p")
    zeta = (partial(eta, "x") + p * (partial(eta, "y") - partial(xi, "x"))
            - p * p * partial(xi, "y"))
    return xi, eta, zeta


class LiftedField:
    """A vector field on R^3(x,y,p) prolonged to a jet bundle.

    Order-0 fiber components follow the induced action on (f, g) (the
    single-fiber bundle is the same formula restricted to g = p); higher
    components obey the transport recursion
    Phi[s+v] = D_v(Phi[s]) - sum_w u[s+w] * d(coef_w)/dv.
    """

    def __init__(self, bundle: Bundle, xi, eta, zeta):
        self.bundle = bundle
        self.xi = as_expression(xi)
        self.eta = as_expression(eta)
        self.zeta = as_expression(zeta)
        self._coef = {"x": self.xi, "y": self.eta, "p": self.zeta}
        self._components: dict[tuple[str, str], Expression] = {}
        self._base_table = {
            variable("x").index: self.xi,
            variable("y").index: self.eta,
            variable("p").index: self.zeta,
        }

    def coefficient(self, v: str) -> Expression:
        return self._coef[v]

    def component(self, func: str, multi: str = "") -> Expression:
        """Fiber component on the jet coordinate (func, multi)."""
        multi = "".join(sorted(multi))
        hit = self._components.get((func, multi))
        if hit is not None:
            return hit
        if len(multi) > self.bundle.order:
            raise OrderBudgetError(
                f"prolongation past order budget {self.bundle.order}")
        if not multi:
            value = self._order_zero(func)
        else:
            parent, v = multi[:-1], multi[-1]
            value = self.bundle.total_derivative(self.component(func, parent), v)
            for w in BASE_NAMES:
                dcoef = partial(self._coef[w], v)
                if not dcoef.is_zero:
                    value = value - self.bundle.jet(func, "".join(sorted(parent + w))) * dcoef
        self._components[(func, multi)] = value
        return value

    def _order_zero(self, func: str) -> Expression:
        xi, eta, zeta = self.xi, self.eta, self.zeta
        f = Expression.var("f")
        if self.bundle.fibers == ("f",):
            g = Expression.var("p")
        else:
            g = Expression.var("g")
        transport = (partial(xi, "p") * f + partial(xi, "y") * g + partial(xi, "x"))
        if func == "f":
            return (partial(zeta, "p") * f + partial(zeta, "y") * g
                    + partial(zeta, "x") - transport * f)
        if func == "g":
            return (partial(eta, "p") * f + partial(eta, "y") * g
                    + partial(eta, "x") - transport * g)
        raise ExpressionError(f"unknown fiber function {func!r}")

    def apply(self, e) -> Expression:
        """Lie derivative of a jet expression along the lifted field."""
        e = as_expression(e)
        table = dict(self._base_table)
        for i in _all_gens(e):
            info = self.bundle.jet_info.get(i)
            if info is not None:
                table[i] = self.component(info[0], info[1])
        return derive(e, table)


def prolong_to_jets(field, bundle: Bundle) -> LiftedField:
    """Lift (xi, eta, zeta) on R^3 to the given jet bundle."""
    xi, eta, zeta = field
    return LiftedField(bundle, xi, eta, zeta)
