"""(p,q)-basic numbers, shifted factorials and deformed exponential series.

All routines work in double precision. Series are summed through the ratio
of consecutive terms, which keeps the super-geometric prefactors from
overflowing before they are multiplied by the matching powers of z.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterator

from .errors import (
    DivergentSeries,
    NonconvergentProduct,
    OutsideDomain,
    TruncationBudgetExceeded,
)

# Below this distance from (1, 1) the basic-number ratio is summed directly.
NEAR_CLASSICAL = 1e-8
# Relative slack used when comparing a radius indicator against 1.
BOUNDARY_SLACK = 1e-13
CANCELLATION_LIMIT = 1e4


class Regime(Enum):
    STRICTLY_DEFORMED = "StrictlyDeformed"
    ARIK_COON = "ArikCoon"
    CLASSICAL = "Classical"


@dataclass(frozen=True)
class DeformationParams:
    """Deformation pair with ``p >= 1`` and ``0 < q <= 1``.

    ``p > 1`` requires ``p*q < 1``; ``q == 1`` is only admitted together
    with ``p == 1``.
    """

    p: float = 1.0
    q: float = 1.0

    def __post_init__(self):
        p, q = float(self.p), float(self.q)
        if not (math.isfinite(p) and math.isfinite(q)):
            raise ValueError("p and q must be finite")
        if p < 1.0:
            raise ValueError(f"p must be >= 1, got {p}")
        if not 0.0 < q <= 1.0:
            raise ValueError(f"q must lie in (0, 1], got {q}")
        if p > 1.0 and p * q >= 1.0:
            raise ValueError(f"p > 1 requires p*q < 1, got p*q = {p * q}")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)

    @property
    def regime(self) -> Regime:
        if self.p == 1.0 and self.q == 1.0:
            return Regime.CLASSICAL
        if self.p == 1.0:
            return Regime.ARIK_COON
        return Regime.STRICTLY_DEFORMED

    @property
    def near_classical(self) -> bool:
        return abs(self.p - 1.0) < NEAR_CLASSICAL and abs(1.0 - self.q) < NEAR_CLASSICAL

    def scaled(self, alpha: float) -> "DeformationParams":
        """Return the pair ``(p**alpha, q**alpha)``."""
        return DeformationParams(self.p**alpha, self.q**alpha)


@dataclass(frozen=True)
class SeriesControl:
    rel_tol: float = 1e-16
    abs_tol: float = 1e-300
    max_terms: int = 4000

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")
        if int(self.max_terms) < 1:
            raise ValueError("max_terms must be >= 1")


DEFAULT_CONTROL = SeriesControl()


class RadiusKind(Enum):
    INFINITE = "Infinite"
    FINITE = "Finite"
    ZERO = "Zero"


@dataclass(frozen=True)
class ConvergenceRadius:
    kind: RadiusKind
    value: float | None = None

    def __post_init__(self):
        if self.kind is RadiusKind.FINITE:
            if self.value is None or not self.value > 0 or not math.isfinite(self.value):
                raise ValueError("Finite radius needs a positive finite value")
        elif self.value is not None:
            raise ValueError(f"{self.kind.value} radius carries no value")

    @classmethod
    def infinite(cls) -> "ConvergenceRadius":
        return cls(RadiusKind.INFINITE)

    @classmethod
    def finite(cls, value: float) -> "ConvergenceRadius":
        return cls(RadiusKind.FINITE, float(value))

    @classmethod
    def zero(cls) -> "ConvergenceRadius":
        return cls(RadiusKind.ZERO)

    @property
    def as_float(self) -> float:
        if self.kind is RadiusKind.INFINITE:
            return math.inf
        if self.kind is RadiusKind.ZERO:
            return 0.0
        return self.value

    def contains(self, r: float) -> bool:
        """Open-disk membership; the boundary is excluded."""
        return abs(r) < self.as_float

    def __str__(self) -> str:
        if self.kind is RadiusKind.FINITE:
            return f"Finite({self.value:.17g})"
        return self.kind.value

    @staticmethod
    def smaller(a: "ConvergenceRadius", b: "ConvergenceRadius") -> "ConvergenceRadius":
        return a if a.as_float <= b.as_float else b


class SeriesFamily(Enum):
    CAL_E = "CalE"
    FRAK_E = "FrakE"


# ---------------------------------------------------------------------------
# basic numbers and products


def basic_number(n: int, d: DeformationParams) -> float:
    """Return ``[n] = (p**-n - q**n) / (p**-1 - q)``.

    The classical pair gives ``n`` exactly. Close to ``(1, 1)`` the ratio
    is replaced by the equivalent finite sum ``sum_k p**-k q**(n-1-k)``.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    if n == 0:
        return 0.0
    if d.regime is Regime.CLASSICAL:
        return float(n)
    a, b = 1.0 / d.p, d.q
    if d.near_classical:
        return math.fsum(a**k * b ** (n - 1 - k) for k in range(n))
    return (a**n - b**n) / (a - b)


def basic_numbers(n_max: int, d: DeformationParams) -> list[float]:
    """``[0], [1], ..., [n_max]`` as a list."""
    return [basic_number(n, d) for n in range(n_max + 1)]


def basic_factorial(n: int, d: DeformationParams) -> float:
    if n < 0:
        raise ValueError("n must be non-negative")
    out = 1.0
    for k in range(1, n + 1):
        out *= basic_number(k, d)
    return out


def basic_number_limit(d: DeformationParams) -> float:
    """Large-n limit of ``[n]``: 0 for p > 1, 1/(1-q) for p = 1, inf classically."""
    if d.regime is Regime.CLASSICAL:
        return math.inf
    if d.regime is Regime.ARIK_COON:
        return 1.0 / (1.0 - d.q)
    return 0.0


def turnaround_index(d: DeformationParams, n_bound: int = 200) -> int | None:
    """First ``n`` with ``[n+1] < [n]``, or None if none occurs up to ``n_bound``."""
    if d.regime is not Regime.STRICTLY_DEFORMED:
        return None
    cur = basic_number(1, d)
    for n in range(1, n_bound + 1):
        nxt = basic_number(n + 1, d)
        if nxt < cur:
            return n
        cur = nxt
    return None


def q_pochhammer(x: complex, q: float, order: int | float = math.inf,
                 ctl: SeriesControl = DEFAULT_CONTROL) -> complex:
    """``(x; q)_n = prod_{k<n} (1 - x q**k)``; ``order=math.inf`` for the infinite product.

    The infinite product stops once ``|x q**k|`` is small enough that every
    remaining factor, taken together, moves the result by less than rel_tol.
    """
    if order != math.inf:
        n = int(order)
        if n < 0:
            raise ValueError("order must be non-negative")
        out = 1.0
        for k in range(n):
            out *= 1.0 - x * q**k
        return out
    if abs(q) >= 1.0:
        raise NonconvergentProduct(f"(x; q)_inf needs |q| < 1, got q = {q}")
    out = 1.0
    xk = x
    bound = ctl.rel_tol * (1.0 - abs(q))
    for _ in range(ctl.max_terms):
        if abs(xk) < bound:
            return out
        out *= 1.0 - xk
        xk *= q
    raise TruncationBudgetExceeded(f"(x; q)_inf not converged after {ctl.max_terms} factors")


def log_q_pochhammer_neg(s: float, q: float, ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """``log (-s; q)_inf`` for ``s >= 0``, accumulated through log1p.

    Once the running argument drops below 1e-3 the remaining factors are
    summed in closed form, ``sum_m (-1)**(m+1) s**m / (m (1 - q**m))``.
    """
    if not 0.0 < q < 1.0:
        raise NonconvergentProduct(f"need 0 < q < 1, got {q}")
    if s < 0:
        raise OutsideDomain("s must be non-negative")
    total = 0.0
    sk = s
    for _ in range(ctl.max_terms):
        if sk < 1e-3:
            tail = 0.0
            power = 1.0
            for m in range(1, 8):
                power *= sk
                tail += (-1) ** (m + 1) * power / (m * (1.0 - q**m))
            return total + tail
        total += math.log1p(sk)
        sk *= q
    raise TruncationBudgetExceeded(f"log product not converged after {ctl.max_terms} factors")


def pq_shifted_factorial(a: float, b: float, d: DeformationParams,
                         order: int | float = math.inf,
                         ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """``[a, b; p, q]_n = prod_{k<n} (1/(a p**k) - b q**k)``.

    For the infinite order the product is split as
    ``prod (a p**k)**-1 * prod (1 - a b (pq)**k)``; the first factor only
    has a finite nonzero limit when ``p == 1`` and ``a == 1``.
    """
    if a == 0:
        raise ValueError("a must be nonzero")
    p, q = d.p, d.q
    if order != math.inf:
        n = int(order)
        if n < 0:
            raise ValueError("order must be non-negative")
        out = 1.0
        for k in range(n):
            out *= 1.0 / (a * p**k) - b * q**k
        return out
    if p * q >= 1.0:
        raise NonconvergentProduct(f"[a, b; p, q]_inf needs p*q < 1, got {p * q}")
    if p > 1.0 or abs(a) > 1.0:
        return 0.0 * q_pochhammer(a * b, p * q, math.inf, ctl)
    if a == 1.0:
        return q_pochhammer(a * b, p * q, math.inf, ctl)
    raise NonconvergentProduct(f"prefactor prod (a p**k)**-1 diverges for p = 1, |a| = {abs(a)} < 1")


# ---------------------------------------------------------------------------
# series machinery


def sum_ratio_series(ratio: Callable[[int], complex], ctl: SeriesControl = DEFAULT_CONTROL,
                     first: complex = 1.0) -> complex:
    """Sum ``t_0 + t_1 + ...`` with ``t_0 = first`` and ``t_{n+1} = t_n * ratio(n)``.

    Stops after three consecutive terms below ``rel_tol*|sum| + abs_tol``.
    """
    total = complex(first)
    term = complex(first)
    small = 0
    for n in range(int(ctl.max_terms)):
        term = term * ratio(n)
        total += term
        if abs(term) < ctl.rel_tol * abs(total) + ctl.abs_tol:
            small += 1
            if small >= 3:
                return total
        else:
            small = 0
        if not cmath.isfinite(total):
            raise DivergentSeries("partial sums overflowed")
    raise TruncationBudgetExceeded(f"series not converged after {ctl.max_terms} terms")


def ratio_terms(ratio: Callable[[int], complex], count: int, first: complex = 1.0) -> Iterator[complex]:
    """Yield the first ``count`` terms of a ratio-defined series."""
    term = complex(first)
    for n in range(count):
        yield term
        term = term * ratio(n)


def _q_basic(n: int, q: float) -> float:
    """One-parameter basic number ``(1 - q**n)/(1 - q)``, n at ``q == 1``."""
    if q == 1.0:
        return float(n)
    if abs(1.0 - q) < NEAR_CLASSICAL:
        return math.fsum(q**k for k in range(n))
    return (1.0 - q**n) / (1.0 - q)


def _exp_mu_q_ratio(z: complex, mu: float, q: float, rescaled: bool) -> Callable[[int], complex]:
    if rescaled:
        return lambda n: q ** (mu * (2 * n + 1)) * z / _q_basic(n + 1, q)
    return lambda n: q ** (mu * (2 * n + 1)) * z / (1.0 - q ** (n + 1))


def exp_mu_q(z: complex, mu: float, q: float, ctl: SeriesControl = DEFAULT_CONTROL,
             rescaled: bool = False) -> complex:
    """``sum q**(mu n**2) z**n / (q; q)_n``.

    With ``rescaled=True`` the argument is first multiplied by ``1 - q``,
    which gives a finite classical limit ``exp(z)`` at ``q == 1``.
    """
    if mu < 0:
        raise DivergentSeries(f"mu = {mu} < 0: nowhere convergent")
    if not 0.0 < q <= 1.0:
        raise OutsideDomain(f"q must lie in (0, 1], got {q}")
    if q == 1.0 and not rescaled:
        raise OutsideDomain("q = 1 needs rescaled=True ((q; q)_n vanishes)")
    if mu == 0 and q < 1.0:
        reach = abs(z) * (1.0 - q) if rescaled else abs(z)
        if reach >= 1.0:
            raise OutsideDomain(f"mu = 0 requires |z| < 1 (scaled |z| = {reach})")
    return sum_ratio_series(_exp_mu_q_ratio(z, mu, q, rescaled), ctl)


def jackson_Eq(z: complex, q: float, ctl: SeriesControl = DEFAULT_CONTROL,
               rescaled: bool = False) -> complex:
    """Jackson exponential ``sum q**(n(n-1)/2) z**n / (q; q)_n``, entire in z."""
    if not 0.0 < q <= 1.0:
        raise OutsideDomain(f"q must lie in (0, 1], got {q}")
    if q == 1.0 and not rescaled:
        raise OutsideDomain("q = 1 needs rescaled=True")
    if rescaled:
        return sum_ratio_series(lambda n: q**n * z / _q_basic(n + 1, q), ctl)
    ratio = lambda n: q**n * z / (1.0 - q ** (n + 1))  # noqa: E731
    total = sum_ratio_series(ratio, ctl)
    magnitude = sum_ratio_series(lambda n: abs(ratio(n)), ctl).real
    if magnitude > CANCELLATION_LIMIT * abs(total):
        # alternating terms cancel; the product (-z; q)_inf has no such loss
        return q_pochhammer(-z, q, math.inf, ctl)
    return total


def e_q(z: complex, q: float, ctl: SeriesControl = DEFAULT_CONTROL) -> complex:
    """Little q-exponential ``sum z**n/(q; q)_n`` on the unit disk."""
    return exp_mu_q(z, 0.0, q, ctl)


def _pq_denominator_ratio(n: int, d: DeformationParams, rescaled: bool) -> float:
    """``[p,q;p,q]_{n+1} / [p,q;p,q]_n``, or ``[n+1]`` when rescaled."""
    if rescaled:
        return basic_number(n + 1, d)
    return d.p ** (-(n + 1)) - d.q ** (n + 1)


def _require_pq_series(d: DeformationParams, rescaled: bool) -> None:
    if d.regime is Regime.CLASSICAL and not rescaled:
        raise OutsideDomain("[p,q;p,q]_n vanishes at p = q = 1; use rescaled=True")


def classify_radius(family: SeriesFamily, mu: float, nu: float, d: DeformationParams) -> ConvergenceRadius:
    """Radius of convergence of the (mu, nu) exponential series in z."""
    p, q = d.p, d.q
    if family is SeriesFamily.FRAK_E:
        c = q**mu / p**nu
        return ConvergenceRadius.infinite() if c <= 1.0 + BOUNDARY_SLACK else ConvergenceRadius.zero()
    if d.regime is Regime.CLASSICAL:
        # Only the rescaled series exists here; its growth is set by q**mu / p**nu = 1.
        return ConvergenceRadius.infinite()
    x = q ** (2 * mu) * p ** (1 - 2 * nu)
    if abs(x - 1.0) <= BOUNDARY_SLACK:
        return ConvergenceRadius.finite(p ** (nu - 1) * q ** (-mu))
    if x < 1.0:
        return ConvergenceRadius.infinite()
    return ConvergenceRadius.zero()


def cal_E_pq_ratio(z: complex, mu: float, nu: float, d: DeformationParams,
                   rescaled: bool = False) -> Callable[[int], complex]:
    c = d.q**mu / d.p**nu
    return lambda n: c ** (2 * n + 1) * z / _pq_denominator_ratio(n, d, rescaled)


def cal_E_pq(z: complex, mu: float, nu: float, d: DeformationParams,
             ctl: SeriesControl = DEFAULT_CONTROL, rescaled: bool = False) -> complex:
    """``sum (q**mu/p**nu)**(n**2) z**n / [p,q;p,q]_n``.

    ``rescaled=True`` evaluates the series at ``z*(1/p - q)``, i.e. with
    ``[n]!`` in the denominator; that form tends to ``exp(z)`` classically.
    """
    _require_pq_series(d, rescaled)
    radius = classify_radius(SeriesFamily.CAL_E, mu, nu, d)
    if radius.kind is RadiusKind.ZERO:
        raise DivergentSeries(
            f"radius Zero: q^(2mu) p^(1-2nu) = {d.q ** (2 * mu) * d.p ** (1 - 2 * nu):.6g} > 1")
    reach = abs(z) * (1.0 / d.p - d.q) if rescaled else abs(z)
    if not radius.contains(reach):
        raise OutsideDomain(f"|z| = {reach:.6g} outside radius {radius}")
    return sum_ratio_series(cal_E_pq_ratio(z, mu, nu, d, rescaled), ctl)


def jackson_E_pq(z: complex, d: DeformationParams, ctl: SeriesControl = DEFAULT_CONTROL) -> complex:
    """``E_(p,q)(z) = sum (q/p)**(n(n-1)/2) z**n / [p,q;p,q]_n``."""
    _require_pq_series(d, False)
    r = d.q / d.p
    return sum_ratio_series(lambda n: r**n * z / _pq_denominator_ratio(n, d, False), ctl)


def e_pq(z: complex, d: DeformationParams, ctl: SeriesControl = DEFAULT_CONTROL,
         rescaled: bool = False) -> complex:
    """``e_(p,q)(z) = sum p**(-n**2/2) z**n / [p,q;p,q]_n`` on ``|z| < p**-1/2``."""
    _require_pq_series(d, rescaled)
    reach = abs(z) * (1.0 / d.p - d.q) if rescaled else abs(z)
    if d.regime is not Regime.CLASSICAL and reach >= d.p ** -0.5:
        raise OutsideDomain(f"|z| = {reach:.6g} >= p^(-1/2) = {d.p ** -0.5:.6g}")
    p = d.p
    return sum_ratio_series(
        lambda n: p ** (-(2 * n + 1) / 2) * z / _pq_denominator_ratio(n, d, rescaled), ctl)


def e_pq_product(x: float, d: DeformationParams, ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """``e_(p,q)(x) = 1/(p**1/2 x; pq)_inf`` for real ``x <= 0``.

    This continues the series to the whole negative axis. Returned through
    a log-sum so very large ``|x|`` underflow to 0 instead of overflowing.
    """
    if x > 0:
        raise OutsideDomain("product continuation is used on the non-positive axis only")
    return math.exp(-log_q_pochhammer_neg(-x * math.sqrt(d.p), d.p * d.q, ctl))


def frak_e_pq(z: complex, mu: float, nu: float, d: DeformationParams,
              ctl: SeriesControl = DEFAULT_CONTROL) -> complex:
    """``sum (q**mu/p**nu)**(n**2) z**n / n!``."""
    radius = classify_radius(SeriesFamily.FRAK_E, mu, nu, d)
    if radius.kind is RadiusKind.ZERO:
        raise DivergentSeries(f"radius Zero: q^mu p^-nu = {d.q ** mu / d.p ** nu:.6g} > 1")
    c = d.q**mu / d.p**nu
    return sum_ratio_series(lambda n: c ** (2 * n + 1) * z / (n + 1), ctl)
