"""Exception types shared across the package."""


class JetinvError(Exception):
    """Base class for all package errors."""


class ExpressionError(JetinvError):
    """Invalid symbolic operation (bad exponent, division by zero expression, ...)."""


class ParseError(JetinvError):
    """Syntax error in the expression surface language."""

    def __init__(self, message, position):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class EvaluationError(JetinvError):
    """Numeric evaluation failed (unbound variable, zero denominator, bad radicand)."""


class SingularPointError(EvaluationError):
    """A designated nonvanishing quantity vanished at the evaluation point."""

    def __init__(self, name, point=None):
        msg = f"singular point: {name} vanishes"
        if point is not None:
            msg += f" at {point}"
        super().__init__(msg)
        self.name = name


class OrderBudgetError(JetinvError):
    """A jet operation would need derivatives beyond the bundle's order budget."""


class SamplingError(JetinvError):
    """Random evaluation could not find admissible sample points."""
