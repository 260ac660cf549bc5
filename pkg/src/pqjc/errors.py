"""Exception hierarchy shared by all pqjc modules."""


class PQJCError(Exception):
    """Base class for every error raised by the library."""


class OutsideDomain(PQJCError, ValueError):
    """Argument lies outside the convergence domain of a series or weight."""


class DivergentSeries(PQJCError, ArithmeticError):
    """The series has zero radius of convergence, or a negative exponent parameter."""


class NonconvergentProduct(PQJCError, ArithmeticError):
    """An infinite product was requested with a base that does not converge."""


class TruncationBudgetExceeded(PQJCError, ArithmeticError):
    """A series did not meet its stopping rule within ``max_terms``."""


class CutoffMismatch(PQJCError, ValueError):
    """Truncated objects with incompatible cutoffs were combined."""


class OracleMismatch(PQJCError, AssertionError):
    """A closed form disagrees with its independent numerical oracle."""


class AmbiguousSign(PQJCError, ValueError):
    """The decoupled spectrum sits on a level crossing, so sign E([n+1]) is undefined."""


class SpectrumNotBoundedBelow(PQJCError, ValueError):
    """E_n <= E_0 for some n >= 1, so action-identity K-factors are not real."""


class QuadratureFailure(PQJCError, ArithmeticError):
    """Adaptive quadrature could not reach the requested tolerance."""


class MomentPrereqFailed(PQJCError, AssertionError):
    """Resolution of identity requested but the moment conditions did not verify."""


class ConfigError(PQJCError, ValueError):
    """Invalid run configuration; ``field`` names the offending key."""

    def __init__(self, field: str, message: str, line: int | None = None):
        self.field = field
        self.line = line
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{field}: {message}")
