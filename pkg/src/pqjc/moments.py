"""Weight functions for the overcompleteness relation and their moment checks.

Moments are computed by adaptive quadrature (scipy's QUADPACK wrapper) in the
variable ``x = log u``. The closed-form right-hand sides are evaluated from
the deformed factorials, so each check compares two independent paths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np
from scipy import integrate

from .errors import MomentPrereqFailed, OutsideDomain, QuadratureFailure
from .ladder import LadderScheme
from .pqmath import (
    DEFAULT_CONTROL,
    DeformationParams,
    Regime,
    SeriesControl,
    basic_factorial,
    cal_E_pq,
    log_q_pochhammer_neg,
    pq_shifted_factorial,
    q_pochhammer,
)
from .spectrum import JCModelParams

REL_FLOOR = 1e-300
EPS = float(np.finfo(float).eps)
WIDE_CONTROL = SeriesControl(max_terms=200_000)
# Angular integrals of cos^2 and sin^2 against sin(theta) over [0, pi].
ANGULAR_PLUS = 2.0 / 3.0
ANGULAR_MINUS = 4.0 / 3.0
BRANCH_PREFACTOR = {"+": 3.0 / (4.0 * math.pi**2), "-": 3.0 / (8.0 * math.pi**2)}


class WeightKind(Enum):
    PQ_EXPLICIT = "PQExplicit"
    FOCK_EXPLICIT = "FockExplicit"
    ALPHA_FAMILY = "AlphaFamily"


@dataclass(frozen=True)
class WeightChoice:
    """A weight family; it fixes (mu, nu, p0, q0), the model only supplies (p, q)."""

    kind: WeightKind
    alpha: float = 1.0

    def __post_init__(self):
        if self.kind is WeightKind.ALPHA_FAMILY and not (self.alpha > 0 and math.isfinite(self.alpha)):
            raise ValueError(f"alpha must be positive, got {self.alpha}")

    @classmethod
    def pq_explicit(cls) -> "WeightChoice":
        return cls(WeightKind.PQ_EXPLICIT)

    @classmethod
    def fock(cls) -> "WeightChoice":
        return cls(WeightKind.FOCK_EXPLICIT)

    @classmethod
    def alpha_family(cls, alpha: float) -> "WeightChoice":
        return cls(WeightKind.ALPHA_FAMILY, alpha)

    def exponent(self) -> float:
        return {WeightKind.PQ_EXPLICIT: 1.0, WeightKind.FOCK_EXPLICIT: 0.0,
                WeightKind.ALPHA_FAMILY: self.alpha}[self.kind]

    def deformation(self, d: DeformationParams) -> DeformationParams:
        """The pair ``(p0, q0)`` the ladder operators obey."""
        if self.kind is WeightKind.FOCK_EXPLICIT:
            return DeformationParams(1.0, 1.0)
        a = self.exponent()
        pa, qa = d.p**a, d.q**a
        if not pa * qa < 1.0:
            raise OutsideDomain(f"{self.kind.value} needs (pq)^alpha < 1, got {pa * qa}")
        return DeformationParams(pa, qa)

    def mu_nu(self) -> tuple[float, float]:
        return 0.5 * self.exponent(), 0.0

    def scheme(self, d: DeformationParams) -> LadderScheme:
        d0 = self.deformation(d)
        return LadderScheme.algebra(d0.p, d0.q)

    def model(self, base: JCModelParams) -> JCModelParams:
        """``base`` with mu and nu set by this choice."""
        mu, nu = self.mu_nu()
        return base.with_(mu=mu, nu=nu)


def _pq_weight_parts(d0: DeformationParams) -> tuple[float, float, float]:
    """Scale ``lambda0 = (1/p - q)/q``, prefactor and product base for a deformed weight."""
    p, q = d0.p, d0.q
    lam0 = (1.0 / p - q) / q
    return lam0, lam0 / math.log(1.0 / (p * q)), p * q


def weight_log_h(u: float, choice: WeightChoice, model: JCModelParams,
                 ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """``log h(u)``; finite even where ``h`` itself underflows."""
    if u < 0:
        raise OutsideDomain("weights are defined for u >= 0")
    if choice.kind is WeightKind.FOCK_EXPLICIT:
        return -u
    lam0, pref, base = _pq_weight_parts(choice.deformation(model.d))
    # e_(p,q)(-u p^{-1/2} lam0) = 1 / (-lam0 u; pq)_inf
    return math.log(pref) - log_q_pochhammer_neg(lam0 * u, base, ctl)


def weight_h(u: float, choice: WeightChoice, model: JCModelParams,
             ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    return math.exp(weight_log_h(u, choice, model, ctl))


def weight_h_series(u: float, choice: WeightChoice, model: JCModelParams,
                    ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """Same weight through the e_(p,q) power series; valid only inside its disk."""
    from .pqmath import e_pq

    if choice.kind is WeightKind.FOCK_EXPLICIT:
        return math.exp(-u)
    d0 = choice.deformation(model.d)
    lam0, pref, _ = _pq_weight_parts(d0)
    return pref * e_pq(-u * lam0 / math.sqrt(d0.p), d0, ctl).real


def normalization_inverse_square(r: float, choice: WeightChoice, model: JCModelParams,
                                 ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """``N(r)**-2`` in closed form for the weight families."""
    if choice.kind is WeightKind.FOCK_EXPLICIT:
        return math.exp(r * r)
    d0 = choice.deformation(model.d)
    return cal_E_pq(r * r * (1.0 / d0.p - d0.q) / math.sqrt(d0.q), 0.5, 0.0, d0, ctl).real


def weight_W(r: float, branch: str, choice: WeightChoice, model: JCModelParams,
             ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """Radial weight of the measure for one tower."""
    if r < 0:
        raise OutsideDomain("|z| must be non-negative")
    inv_sq = normalization_inverse_square(r, choice, model, ctl)
    return BRANCH_PREFACTOR[branch] * inv_sq * weight_h(r * r, choice, model, ctl)


def moment_rhs(n: int, choice: WeightChoice, d: DeformationParams) -> float:
    """Closed-form target ``c**(-n(n-1)) [n]_{p0,q0}!`` of the n-th moment."""
    d0 = choice.deformation(d)
    if choice.kind is WeightKind.FOCK_EXPLICIT:
        return float(math.factorial(n))
    # c = q0**(1/2) for both deformed families
    return d0.q ** (-0.5 * n * (n - 1)) * basic_factorial(n, d0)


# ---------------------------------------------------------------------------
# quadrature


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error: float
    lower_tail: float
    upper_tail: float
    x_range: tuple[float, float]
    evaluations: int


def moment_integral(log_f: Callable[[float], float], n: float, quad_tol: float = 1e-10,
                    f0: float | None = None) -> QuadratureResult:
    """``int_0^inf u**n f(u) du`` for a decreasing log-concave-in-log-u weight ``f``.

    Substituting ``u = e**x`` gives an integrand ``exp((n+1)x + log f(e**x))``
    that is log-concave in ``x``. Both tails are bounded analytically:
    below, ``f <= f(0)``; above, the log-slope only decreases.
    """
    f0 = math.exp(log_f(0.0)) if f0 is None else f0

    def log_g(x: float) -> float:
        return (n + 1) * x + log_f(math.exp(x))

    # log_g is concave: walk uphill in unit steps, then refine by golden section
    x, step = 0.0, 1.0
    if log_g(x + step) < log_g(x):
        step = -step
    while log_g(x + step) > log_g(x):
        x += step
    peak_x = float(_golden_max(log_g, x - 1.0, x + 1.0))
    peak = log_g(peak_x)
    cut = peak + math.log(1e-18)
    x_lo = peak_x
    while log_g(x_lo) > cut and x_lo > -745.0:
        x_lo -= 1.0
    x_hi = peak_x
    while log_g(x_hi) > cut:
        x_hi += 0.5
    lower_tail = f0 * math.exp((n + 1) * x_lo) / (n + 1)
    h = 1e-4
    slope = (log_g(x_hi + h) - log_g(x_hi - h)) / (2 * h)
    upper_tail = math.exp(log_g(x_hi)) / -slope if slope < 0 else math.inf
    scale = math.exp(peak)

    def scaled_integrand(x: float) -> float:
        return math.exp(log_g(x) - peak)

    value, err, info = integrate.quad(scaled_integrand, x_lo, x_hi, points=[peak_x], epsabs=0.0,
                                      epsrel=max(min(quad_tol * 1e-2, 1e-13), 100 * EPS), limit=500,
                                      full_output=True)[:3]
    total = scale * value + lower_tail
    error = scale * err + lower_tail + upper_tail
    if not error <= quad_tol * abs(total):
        raise QuadratureFailure(
            f"moment n={n}: error estimate {error:.3e} exceeds {quad_tol:.1e} x {abs(total):.3e}")
    return QuadratureResult(value=total, error=error, lower_tail=lower_tail, upper_tail=upper_tail,
                            x_range=(x_lo, x_hi), evaluations=int(info["neval"]))


def _golden_max(f: Callable[[float], float], a: float, b: float, iters: int = 80) -> float:
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    c, d = b - inv_phi * (b - a), a + inv_phi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


@dataclass(frozen=True)
class MomentRow:
    n: int
    lhs: float
    rhs: float
    rel_err: float
    quad_error: float


@dataclass(frozen=True)
class MomentReport:
    choice: WeightChoice
    rows: tuple[MomentRow, ...]
    quad_tol: float

    @property
    def max_rel_err(self) -> float:
        return max(r.rel_err for r in self.rows)

    def passed(self, tol: float) -> bool:
        return self.max_rel_err <= tol


def _rel_err(lhs: float, rhs: float) -> float:
    return abs(lhs - rhs) / max(abs(rhs), REL_FLOOR)


def verify_moments(choice: WeightChoice, model: JCModelParams, n_check: int,
                   quad_tol: float = 1e-10) -> MomentReport:
    """Quadrature of ``u**n h(u)`` against the closed-form rhs for ``n = 0..n_check``."""
    log_f = lambda u: weight_log_h(u, choice, model)
    f0 = weight_h(0.0, choice, model)
    rows = []
    for n in range(n_check + 1):
        q = moment_integral(log_f, n, quad_tol, f0)
        rhs = moment_rhs(n, choice, model.d)
        rows.append(MomentRow(n, q.value, rhs, _rel_err(q.value, rhs), q.error))
    return MomentReport(choice, tuple(rows), quad_tol)


@dataclass(frozen=True)
class IntegralCheck:
    lhs: float
    rhs: float
    rel_err: float


def ramanujan_classical(n: int, q: float, quad_tol: float = 1e-10) -> IntegralCheck:
    """``int t**n e_q(-t) dt`` against ``-(q;q)_n q**(-n(n+1)/2) log q``."""
    if not 0.0 < q < 1.0:
        raise OutsideDomain(f"need 0 < q < 1, got {q}")
    log_f = lambda t: -log_q_pochhammer_neg(t, q, WIDE_CONTROL)
    lhs = moment_integral(log_f, n, quad_tol, 1.0).value
    rhs = -q_pochhammer(q, q, n) * q ** (-0.5 * n * (n + 1)) * math.log(q)
    return IntegralCheck(lhs, rhs, _rel_err(lhs, rhs))


def ramanujan_pq(n: int, lambda0: float, model: JCModelParams | DeformationParams,
                 quad_tol: float = 1e-10) -> IntegralCheck:
    """``int t**n e_(p,q)(-lambda0 p**-1/2 t) dt`` against its closed form."""
    d = model.d if isinstance(model, JCModelParams) else model
    if d.regime is Regime.CLASSICAL:
        raise OutsideDomain("the (p,q) integral needs pq < 1")
    if not lambda0 > 0:
        raise ValueError("lambda0 must be positive")
    base = d.p * d.q
    log_f = lambda t: -log_q_pochhammer_neg(lambda0 * t, base, WIDE_CONTROL)
    lhs = moment_integral(log_f, n, quad_tol, 1.0).value
    rhs = (pq_shifted_factorial(d.p, d.q, d, n) / (lambda0 ** (n + 1) * d.q ** (0.5 * n * (n + 1)))
           * math.log(1.0 / base))
    return IntegralCheck(lhs, rhs, _rel_err(lhs, rhs))


# ---------------------------------------------------------------------------
# resolution of the identity


@dataclass(frozen=True)
class ResolutionReport:
    diagonal_plus: tuple[float, ...]
    diagonal_minus: tuple[float, ...]
    max_diagonal_error: float
    max_offdiagonal: float
    cross_tower: float
    moments: MomentReport = field(repr=False)
    singleton_excluded: bool = True


def _phase_integral(k: int, points: int) -> complex:
    """Trapezoid rule for ``int_0^{2 pi} e^{i k phi} d phi``; exact for ``|k| < points``."""
    phi = 2.0 * math.pi * np.arange(points) / points
    return complex(np.sum(np.exp(1j * k * phi)) * 2.0 * math.pi / points)


def resolution_check(choice: WeightChoice, model: JCModelParams, n_pairs: int,
                     quad_tol: float = 1e-10, moment_tol: float = 1e-6) -> ResolutionReport:
    """Assemble ``int dmu |z><z|`` on the first ``n_pairs`` levels of each tower.

    The angular integrals are closed form, the azimuthal phase integrals use
    an exact trapezoid rule, and the radial parts reduce to the verified
    moments. Entries are reported relative to the identity.
    """
    report = verify_moments(choice, model, n_pairs, quad_tol)
    if not report.passed(moment_tol):
        raise MomentPrereqFailed(
            f"moment conditions fail: max rel err {report.max_rel_err:.3e} > {moment_tol:.1e}")
    points = 4 * n_pairs + 8
    lhs = np.array([r.lhs for r in report.rows])
    rhs = np.array([r.rhs for r in report.rows])
    # radial integral ratio lhs/rhs equals the diagonal entry once the
    # 2 pi azimuth, the angular integral and the 1/2 from r dr = du/2 cancel the prefactor
    diag = {}
    for branch, angular in (("+", ANGULAR_PLUS), ("-", ANGULAR_MINUS)):
        factor = BRANCH_PREFACTOR[branch] * 2.0 * math.pi * angular * 0.5
        phase = _phase_integral(0, points).real
        diag[branch] = factor * phase * lhs / rhs
    off = 0.0
    for m in range(n_pairs + 1):
        for n in range(n_pairs + 1):
            if m == n:
                continue
            bound = math.sqrt(diag["+"][m] * diag["+"][n]) / (2.0 * math.pi)
            off = max(off, abs(_phase_integral(m - n, points)) * bound)
    # the +/- blocks carry e^{-i phi} from the minus coefficient; its azimuthal integral vanishes
    azimuth = np.arange(points) * 2.0 * math.pi / points
    cross = abs(np.sum(np.exp(1j * azimuth))) * 2.0 * math.pi / points
    errors = np.concatenate([np.abs(diag["+"] - 1.0), np.abs(diag["-"] - 1.0)])
    return ResolutionReport(
        diagonal_plus=tuple(float(x) for x in diag["+"]),
        diagonal_minus=tuple(float(x) for x in diag["-"]),
        max_diagonal_error=float(np.max(errors)),
        max_offdiagonal=float(max(off, cross)),
        cross_tower=float(cross),
        moments=report,
    )
