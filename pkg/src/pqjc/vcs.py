"""Vector coherent states built on the two eigen-towers.

The state is ``cos(theta) N+ sum_n w+_n e^{-i w0 tau+ E+_n} |E+_n>`` plus the
matching ``e^{i phi} sin(theta)`` term on the minus tower, with
``w_n = c**(n(n-1)/2) z**n / K0(n)!`` and ``c = q**mu / p**nu``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    CutoffMismatch,
    DivergentSeries,
    OutsideDomain,
    SpectrumNotBoundedBelow,
    TruncationBudgetExceeded,
)
from .ladder import (
    BRANCHES,
    LadderPair,
    LadderScheme,
    SchemeKind,
    apply_lowering,
    bind_coefficients,
    k_modulus,
)
from .pqmath import (
    BOUNDARY_SLACK,
    ConvergenceRadius,
    DeformationParams,
    RadiusKind,
    Regime,
    SeriesControl,
    basic_number,
    basic_number_limit,
    sum_ratio_series,
)
from .spectrum import Basis, JCModelParams, SpectrumTable, TruncatedState, build_spectrum

VCS_CONTROL = SeriesControl(rel_tol=1e-15, abs_tol=1e-15, max_terms=4000)
CUSTOM_RADIUS_SAFETY = 0.9


@dataclass(frozen=True)
class VCSParams:
    z: complex
    theta: float
    phi: float
    scheme: LadderScheme
    model: JCModelParams
    tau_plus: float | None = None
    tau_minus: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "z", complex(self.z))
        if not 0.0 <= self.theta <= math.pi:
            raise ValueError(f"theta must lie in [0, pi], got {self.theta}")
        if not 0.0 <= self.phi < 2 * math.pi:
            raise ValueError(f"phi must lie in [0, 2 pi), got {self.phi}")
        if self.tau_plus is None:
            object.__setattr__(self, "tau_plus", self.scheme.tau_plus)
        if self.tau_minus is None:
            object.__setattr__(self, "tau_minus", self.scheme.tau_minus)

    def tau(self, branch: str) -> float:
        return self.tau_plus if branch == "+" else self.tau_minus

    def shifted(self, t: float) -> "VCSParams":
        from dataclasses import replace

        return replace(self, tau_plus=self.tau_plus + t, tau_minus=self.tau_minus + t)


@dataclass(frozen=True)
class TruncationReport:
    n_max: int
    last_term_plus: float
    last_term_minus: float
    tail_ok: bool


@dataclass(frozen=True)
class VCSState:
    params: VCSParams
    table: SpectrumTable
    ladder: LadderPair
    coeff_plus: np.ndarray
    coeff_minus: np.ndarray
    norm_plus: float
    norm_minus: float
    radius_plus: ConvergenceRadius
    radius_minus: ConvergenceRadius
    report: TruncationReport
    weights_plus: np.ndarray = field(repr=False)
    weights_minus: np.ndarray = field(repr=False)

    @property
    def n_max(self) -> int:
        return len(self.coeff_plus) - 1

    @property
    def radius(self) -> ConvergenceRadius:
        return ConvergenceRadius.smaller(self.radius_plus, self.radius_minus)

    def coeffs(self, branch: str) -> np.ndarray:
        return self.coeff_plus if branch == "+" else self.coeff_minus

    def as_truncated_state(self) -> TruncatedState:
        v = np.zeros(2 * self.n_max + 3, dtype=complex)
        v[1::2] = self.coeff_plus
        v[2::2] = self.coeff_minus
        return TruncatedState(Basis.EIGEN, v, self.n_max)

    def total_norm(self) -> float:
        return float(math.sqrt(np.sum(np.abs(self.coeff_plus) ** 2) + np.sum(np.abs(self.coeff_minus) ** 2)))


@dataclass(frozen=True)
class QVOperator:
    """Diagonal operator: 1 on the singleton, ``c**n`` on ``|E_n^+->``."""

    mu: float
    nu: float
    d: DeformationParams

    @property
    def base(self) -> float:
        return self.d.q**self.mu / self.d.p**self.nu

    def eigenvalues(self, cutoff: int) -> np.ndarray:
        out = np.empty(2 * cutoff + 3)
        out[0] = 1.0
        powers = self.base ** np.arange(cutoff + 1, dtype=float)
        out[1::2] = powers
        out[2::2] = powers
        return out

    def apply(self, v: TruncatedState) -> TruncatedState:
        if v.basis is not Basis.EIGEN:
            raise ValueError("QVOperator is diagonal in the eigenbasis")
        return TruncatedState(Basis.EIGEN, self.eigenvalues(v.cutoff) * v.coeffs, v.cutoff)


# ---------------------------------------------------------------------------
# radii and normalization


def _algebra_radius(scheme: LadderScheme, model: JCModelParams) -> ConvergenceRadius:
    p0, q0 = scheme.p0, scheme.q0
    c = model.qv_ratio
    x = p0 * c * c
    if abs(x - 1.0) <= BOUNDARY_SLACK:
        if p0 * q0 >= 1.0 - BOUNDARY_SLACK:
            return ConvergenceRadius.infinite()   # undeformed Fock moduli with c = 1
        return ConvergenceRadius.finite((1.0 - p0 * q0) ** -0.5)
    if x < 1.0:
        return ConvergenceRadius.infinite()
    return ConvergenceRadius.zero()


def _asymptotic_energy(model: JCModelParams, branch: str) -> float:
    """``lim E_n`` using the large-n limit of the basic numbers."""
    b_inf = basic_number_limit(model.d)
    one_eps = 1.0 + model.epsilon
    h = model.h_value
    mean = 0.5 * one_eps * (2.0 * h * b_inf + 1.0)
    Q = math.sqrt(0.25 + model.lam**2 * b_inf)
    return mean + Q if branch == "+" else mean - Q


def branch_radius(scheme: LadderScheme, model: JCModelParams, branch: str,
                  table: SpectrumTable | None = None) -> ConvergenceRadius:
    """Convergence radius of the normalization series of one tower."""
    if scheme.kind is SchemeKind.ALGEBRA:
        return _algebra_radius(scheme, model)
    if scheme.kind is SchemeKind.ACTION_IDENTITY:
        if model.d.regime is Regime.CLASSICAL:
            return ConvergenceRadius.infinite()
        table = table if table is not None else build_spectrum(model, 0)
        gap = _asymptotic_energy(model, branch) - float(table.energies(branch)[0])
        if not gap > 0:
            raise SpectrumNotBoundedBelow(
                f"lim E_n^{branch} - E_0^{branch} = {gap:.6g} <= 0; no action-identity disk")
        return ConvergenceRadius.finite(math.sqrt(gap))
    c = model.qv_ratio
    mods = scheme.moduli
    ns = range(max(1, len(mods) - 10), len(mods))
    estimate = CUSTOM_RADIUS_SAFETY * min(c ** (-(n - 1)) * mods[n] for n in ns)
    return ConvergenceRadius.finite(estimate) if estimate > 0 else ConvergenceRadius.zero()


def radius_classification(scheme: LadderScheme, model: JCModelParams) -> str:
    """Human-readable reason behind the radius of the normalization series."""
    if scheme.kind is SchemeKind.ALGEBRA:
        x = scheme.p0 * model.qv_ratio**2
        rel = "<" if x < 1.0 - BOUNDARY_SLACK else (">" if x > 1.0 + BOUNDARY_SLACK else "=")
        return f"Algebra({scheme.p0:.6g}, {scheme.q0:.6g}) growth factor p0*c^2 = {x:.6g} {rel} 1"
    if scheme.kind is SchemeKind.ACTION_IDENTITY:
        return "ActionIdentity moduli bounded by sqrt(lim E_n - E_0)"
    return "Custom moduli estimate"


def _require_inside(r: float, radius: ConvergenceRadius, label: str, why: str = "") -> None:
    if radius.kind is RadiusKind.ZERO:
        raise DivergentSeries(f"{label}: normalization series has radius Zero ({why})")
    if not radius.contains(r):
        raise OutsideDomain(f"{label}: |z| = {r:.6g} not inside radius {radius}")


@dataclass(frozen=True)
class NormalizationResult:
    N: float
    radius: ConvergenceRadius
    inverse_square: float


def normalization(r: float, branch: str, scheme: LadderScheme, model: JCModelParams,
                  ctl: SeriesControl = VCS_CONTROL, table: SpectrumTable | None = None) -> NormalizationResult:
    """``N(|z|)`` summed to convergence, independently of any state build."""
    if r < 0:
        raise ValueError("|z| must be non-negative")
    if scheme.kind is SchemeKind.ACTION_IDENTITY and table is None:
        table = build_spectrum(model, min(int(ctl.max_terms), 2000))
    radius = branch_radius(scheme, model, branch, table)
    _require_inside(r, radius, f"branch {branch}")
    c = model.qv_ratio
    if scheme.kind is SchemeKind.CUSTOM:
        total, term = 1.0, 1.0
        for n in range(1, len(scheme.moduli)):
            term *= c ** (2 * (n - 1)) * r * r / scheme.moduli[n] ** 2
            total += term
    else:
        def ratio(n: int) -> float:
            k = k_modulus(scheme, table, branch, n + 1)
            return c ** (2 * n) * r * r / (k * k)

        total = sum_ratio_series(ratio, ctl).real
    return NormalizationResult(N=total**-0.5, radius=radius, inverse_square=total)


# ---------------------------------------------------------------------------
# construction


def _tower_weights(z: complex, c: float, moduli: np.ndarray) -> np.ndarray:
    """``c**(n(n-1)/2) z**n / K0(n)!`` by the ratio recursion."""
    w = np.empty(len(moduli), dtype=complex)
    w[0] = 1.0
    for n in range(len(moduli) - 1):
        k = moduli[n + 1]
        if k == 0.0:
            if z == 0:
                w[n + 1:] = 0.0
                return w
            raise DivergentSeries(f"K0({n + 1}) = 0 breaks the coefficient recursion")
        w[n + 1] = w[n] * c**n * z / k
    return w


def build_vcs(params: VCSParams, n_max: int = 64, ctl: SeriesControl = VCS_CONTROL,
              table: SpectrumTable | None = None) -> VCSState:
    """Truncated coherent state on levels ``0..n_max`` of both towers."""
    model, scheme = params.model, params.scheme
    if scheme.kind is SchemeKind.CUSTOM and n_max >= len(scheme.moduli):
        n_max = len(scheme.moduli) - 1
    if table is None or table.model != model or table.n_max < n_max:
        table = build_spectrum(model, n_max)
    r = abs(params.z)
    radii = {b: branch_radius(scheme, model, b, table) for b in BRANCHES}
    for b in BRANCHES:
        _require_inside(r, radii[b], f"branch {b}", radius_classification(scheme, model))
    ladder = bind_coefficients(scheme, table, n_max, params.tau_plus, params.tau_minus)
    c = model.qv_ratio
    omega0 = model.omega0
    weights, norms, last = {}, {}, {}
    for b in BRANCHES:
        w = _tower_weights(params.z, c, ladder[b].moduli)
        sq = np.abs(w) ** 2
        total = math.fsum(sq)
        last[b] = float(sq[-1] / total)
        if sq[-1] > ctl.rel_tol * total + ctl.abs_tol and scheme.kind is not SchemeKind.CUSTOM:
            raise TruncationBudgetExceeded(
                f"branch {b}: last normalization term {sq[-1]:.3e} at n_max={n_max} exceeds tail bound")
        weights[b], norms[b] = w, total**-0.5
    E = {b: table.energies(b)[: n_max + 1] for b in BRANCHES}
    cos_t, sin_t = math.cos(params.theta), math.sin(params.theta)
    plus = norms["+"] * cos_t * weights["+"] * np.exp(-1j * omega0 * params.tau_plus * E["+"])
    minus = (norms["-"] * np.exp(1j * params.phi) * sin_t * weights["-"]
             * np.exp(-1j * omega0 * params.tau_minus * E["-"]))
    report = TruncationReport(n_max=n_max, last_term_plus=last["+"], last_term_minus=last["-"],
                              tail_ok=max(last.values()) <= ctl.rel_tol + ctl.abs_tol)
    return VCSState(params=params, table=table, ladder=ladder, coeff_plus=plus, coeff_minus=minus,
                    norm_plus=norms["+"], norm_minus=norms["-"], radius_plus=radii["+"],
                    radius_minus=radii["-"], report=report,
                    weights_plus=weights["+"], weights_minus=weights["-"])


def coefficient_recursion_residual(state: VCSState) -> float:
    """Largest ``|C_{n+1} K(n+1) - z c**n C_n|`` over both towers."""
    z, c = state.params.z, state.params.model.qv_ratio
    worst = 0.0
    for b in BRANCHES:
        C = state.coeffs(b)
        K = state.ladder[b].values[: len(C)]
        n = np.arange(len(C) - 1)
        diff = C[1:] * K[1:] - z * c**n * C[:-1]
        worst = max(worst, float(np.max(np.abs(diff), initial=0.0)))
    return worst


def annihilation_residual(state: VCSState) -> float:
    """``|| A^- psi - z Q psi ||`` on levels below the cutoff."""
    v = state.as_truncated_state()
    lowered = apply_lowering(v, state.ladder)
    model = state.params.model
    scaled = QVOperator(model.mu, model.nu, model.d).apply(v)
    diff = lowered.coeffs - state.params.z * scaled.coeffs
    return float(np.linalg.norm(diff[:-2]))


def evolve(state: VCSState, t: float) -> VCSState:
    """Time evolution as a rebuild with ``tau -> tau + t``."""
    return build_vcs(state.params.shifted(t), state.n_max, table=state.table)


def evolve_by_phase(state: VCSState, t: float) -> tuple[np.ndarray, np.ndarray]:
    """Time evolution by multiplying each amplitude with ``exp(-i w0 t E)``."""
    w0 = state.params.model.omega0
    n = state.n_max + 1
    plus = state.coeff_plus * np.exp(-1j * w0 * t * state.table.E_plus[:n])
    minus = state.coeff_minus * np.exp(-1j * w0 * t * state.table.E_minus[:n])
    return plus, minus


# ---------------------------------------------------------------------------
# expectation values


def action_variables(state: VCSState) -> tuple[float, float]:
    n = state.n_max + 1
    J_plus = float(np.sum(np.abs(state.coeff_plus) ** 2 * state.table.E_plus[:n]))
    J_minus = float(np.sum(np.abs(state.coeff_minus) ** 2 * state.table.E_minus[:n]))
    return J_plus, J_minus


def expectation_H(state: VCSState) -> float:
    return sum(action_variables(state))


def expectation_number(state: VCSState) -> float:
    """``<A^+ A^->`` from the shifted-series closed form."""
    c = state.params.model.qv_ratio
    n = np.arange(state.n_max)
    mass = np.abs(state.coeff_plus[:-1]) ** 2 + np.abs(state.coeff_minus[:-1]) ** 2
    return float(abs(state.params.z) ** 2 * np.sum(c ** (2 * n) * mass))


def action_identity_residual(state: VCSState) -> float:
    """Distance of ``(J+, J-)`` from ``cos^2 (|z|^2 + E0+)``, ``sin^2 (|z|^2 + E0-)``."""
    J_plus, J_minus = action_variables(state)
    r2 = abs(state.params.z) ** 2
    theta = state.params.theta
    target_plus = math.cos(theta) ** 2 * (r2 + state.table.E_plus[0])
    target_minus = math.sin(theta) ** 2 * (r2 + state.table.E_minus[0])
    return max(abs(J_plus - target_plus), abs(J_minus - target_minus))


def _mixing_factors(table: SpectrumTable, n: int) -> tuple[np.ndarray, np.ndarray]:
    """``E/(2Q)`` and ``lambda sqrt([n+1])/Q`` per level, or the stored angles at a crossing."""
    lam = table.model.lam
    diag = np.empty(n)
    cross = np.empty(n)
    d = table.model.d
    for k, lv in enumerate(table.levels[:n]):
        if lv.crossing:
            diag[k] = lv.cos_theta**2 - lv.sin_theta**2
            cross[k] = 2.0 * lv.sin_theta * lv.cos_theta
        else:
            diag[k] = lv.script_E / (2.0 * lv.Q)
            cross[k] = lam * math.sqrt(basic_number(k + 1, d)) / lv.Q
    return diag, cross


def atomic_inversion(state: VCSState, t):
    """``<sigma_3(t)>`` for scalar or array ``t``.

    Per level the diagonal part is ``(|C-|^2 - |C+|^2) E/(2Q)`` and the
    mixed part oscillates at the Zeeman splitting with amplitude
    ``lambda sqrt([n+1]) / Q``.
    """
    p = state.params
    n = state.n_max + 1
    table = state.table
    diag, cross = _mixing_factors(table, n)
    a2 = (state.norm_plus * math.cos(p.theta)) ** 2 * np.abs(state.weights_plus) ** 2
    b2 = (state.norm_minus * math.sin(p.theta)) ** 2 * np.abs(state.weights_minus) ** 2
    static = float(np.sum((b2 - a2) * diag))
    ab = (state.norm_plus * state.norm_minus * math.sin(2 * p.theta)
          * np.abs(state.weights_plus) * np.abs(state.weights_minus) * cross)
    Ep, Em = table.E_plus[:n], table.E_minus[:n]
    w0 = p.model.omega0
    offset = w0 * (p.tau_plus * Ep - p.tau_minus * Em) + p.phi
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    psi = w0 * np.outer(t_arr, Ep - Em) + offset
    out = static + np.cos(psi) @ ab
    return float(out[0]) if np.ndim(t) == 0 else out


def inversion_crossings(state: VCSState) -> tuple[int, ...]:
    """Levels at an exact crossing (``Q = 0``) carrying weight in the state."""
    return tuple(n for n in state.table.diagnostics.crossings
                 if n <= state.n_max and (abs(state.coeff_plus[n]) > 0 or abs(state.coeff_minus[n]) > 0))


def moment_targets(table: SpectrumTable, branch: str, n_check: int) -> np.ndarray:
    """Action-identity moment targets ``prod_{k<=n} (E_k - E_0)`` for ``n = 0..n_check``."""
    if table.n_max < n_check:
        raise CutoffMismatch(f"table stops at {table.n_max}")
    E = table.energies(branch)
    gaps = E[1 : n_check + 1] - E[0]
    if np.any(gaps <= 0):
        raise SpectrumNotBoundedBelow(f"E_n^{branch} <= E_0^{branch} below n = {n_check}")
    return np.concatenate([[1.0], np.cumprod(gaps)])
