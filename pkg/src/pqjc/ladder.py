"""Ladder operators acting inside each eigen-tower.

``A^-|E_n^+-> = K_+-(n) |E_{n-1}^+->`` with ``K(n) = exp(i phi(n)) K0(n)``. The
moduli ``K0`` come from a scheme:

* ``Algebra(p0, q0)``: ``K0(n) = sqrt([n]_{p0,q0})``, so the operators obey a
  (p0, q0)-deformed Fock algebra.
* ``ActionIdentity``: ``K0(n) = c**(n-1) sqrt(E_n - E_0)`` with ``c = q**mu/p**nu``.
* ``Custom``: user-supplied moduli.

The phases are always ``omega0 * tau * (E_n - E_{n-1})``, which makes time
evolution act as a shift of ``tau``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import CutoffMismatch, SpectrumNotBoundedBelow
from .pqmath import DeformationParams, basic_number
from .spectrum import Basis, SpectrumTable, TruncatedState

BRANCHES = ("+", "-")


class SchemeKind(Enum):
    ALGEBRA = "Algebra"
    ACTION_IDENTITY = "ActionIdentity"
    CUSTOM = "Custom"


@dataclass(frozen=True)
class LadderScheme:
    kind: SchemeKind
    p0: float = 1.0
    q0: float = 1.0
    moduli: tuple[float, ...] = ()
    tau_plus: float = 0.0
    tau_minus: float = 0.0

    def __post_init__(self):
        if self.kind is SchemeKind.ALGEBRA:
            # reuses the deformation-pair validation; p0*q0 = 1 with p0 > 1 makes [n] 0/0
            DeformationParams(self.p0, self.q0)
        if self.kind is SchemeKind.CUSTOM:
            mods = tuple(float(m) for m in self.moduli)
            if len(mods) < 2:
                raise ValueError("custom scheme needs moduli for n = 0 and at least n = 1")
            if mods[0] != 0.0:
                raise ValueError("custom moduli must start with K0(0) = 0")
            if any(not (m >= 0 and math.isfinite(m)) for m in mods):
                raise ValueError("custom moduli must be finite and non-negative")
            object.__setattr__(self, "moduli", mods)

    @classmethod
    def algebra(cls, p0: float = 1.0, q0: float = 1.0, tau_plus: float = 0.0,
                tau_minus: float = 0.0) -> "LadderScheme":
        return cls(SchemeKind.ALGEBRA, p0=p0, q0=q0, tau_plus=tau_plus, tau_minus=tau_minus)

    @classmethod
    def action_identity(cls, tau_plus: float = 0.0, tau_minus: float = 0.0) -> "LadderScheme":
        return cls(SchemeKind.ACTION_IDENTITY, tau_plus=tau_plus, tau_minus=tau_minus)

    @classmethod
    def custom(cls, moduli, tau_plus: float = 0.0, tau_minus: float = 0.0) -> "LadderScheme":
        return cls(SchemeKind.CUSTOM, moduli=tuple(moduli), tau_plus=tau_plus, tau_minus=tau_minus)

    @property
    def algebra_params(self) -> DeformationParams:
        return DeformationParams(self.p0, self.q0)

    def tau(self, branch: str) -> float:
        return self.tau_plus if branch == "+" else self.tau_minus


def _energy_gap(table: SpectrumTable, branch: str, n: int) -> float:
    E = table.energies(branch)
    gap = float(E[n] - E[0])
    if n >= 1 and not gap > 0:
        raise SpectrumNotBoundedBelow(
            f"E_{n}^{branch} - E_0^{branch} = {gap:.6g} <= 0; action-identity factor undefined")
    return gap


def k_modulus(scheme: LadderScheme, table: SpectrumTable, branch: str, n: int) -> float:
    """``K0_branch(n)``; zero at ``n = 0`` for every scheme."""
    if n < 0:
        raise ValueError("n must be non-negative")
    if n == 0:
        return 0.0
    if scheme.kind is SchemeKind.ALGEBRA:
        return math.sqrt(basic_number(n, scheme.algebra_params))
    if scheme.kind is SchemeKind.ACTION_IDENTITY:
        if n > table.n_max:
            raise CutoffMismatch(f"spectrum table stops at {table.n_max}, K0({n}) requested")
        c = table.model.qv_ratio
        return c ** (n - 1) * math.sqrt(_energy_gap(table, branch, n))
    if n >= len(scheme.moduli):
        raise CutoffMismatch(f"custom scheme has {len(scheme.moduli)} moduli, K0({n}) requested")
    return scheme.moduli[n]


@dataclass(frozen=True)
class LadderCoefficients:
    branch: str
    moduli: np.ndarray
    phases: np.ndarray

    def __post_init__(self):
        if self.moduli.shape != self.phases.shape:
            raise ValueError("moduli and phases must align")
        if self.moduli[0] != 0.0:
            raise ValueError("K0(0) must vanish")

    @property
    def n_max(self) -> int:
        return len(self.moduli) - 1

    @property
    def values(self) -> np.ndarray:
        """Complex ``K(n) = exp(i phi(n)) K0(n)``."""
        return self.moduli * np.exp(1j * self.phases)


@dataclass(frozen=True)
class LadderPair:
    plus: LadderCoefficients
    minus: LadderCoefficients

    def __getitem__(self, branch: str) -> LadderCoefficients:
        return self.plus if branch == "+" else self.minus

    @property
    def n_max(self) -> int:
        return min(self.plus.n_max, self.minus.n_max)


def bind_coefficients(scheme: LadderScheme, table: SpectrumTable, n_max: int | None = None,
                      tau_plus: float | None = None, tau_minus: float | None = None) -> LadderPair:
    """Evaluate moduli and temporal-stability phases for ``n = 0..n_max``.

    ``tau_plus``/``tau_minus`` override the scheme's offsets.
    """
    n_max = table.n_max if n_max is None else n_max
    if n_max > table.n_max:
        raise CutoffMismatch(f"spectrum table stops at {table.n_max}, binding to {n_max}")
    taus = {"+": scheme.tau_plus if tau_plus is None else tau_plus,
            "-": scheme.tau_minus if tau_minus is None else tau_minus}
    omega0 = table.model.omega0
    out = {}
    for branch in BRANCHES:
        moduli = np.array([k_modulus(scheme, table, branch, n) for n in range(n_max + 1)])
        E = table.energies(branch)[: n_max + 1]
        phases = np.zeros(n_max + 1)
        phases[1:] = omega0 * taus[branch] * np.diff(E)
        out[branch] = LadderCoefficients(branch, moduli, phases)
    return LadderPair(out["+"], out["-"])


def _check_eigen(v: TruncatedState, coeffs: LadderPair, need: int) -> None:
    if v.basis is not Basis.EIGEN:
        raise ValueError("ladder operators act on eigenbasis states")
    if coeffs.n_max < need:
        raise CutoffMismatch(f"coefficients stop at n={coeffs.n_max}, need {need}")


def apply_lowering(v: TruncatedState, coeffs: LadderPair) -> TruncatedState:
    """``A^-`` on an eigenbasis state; the singleton and ``|E_0>`` go to zero."""
    N = v.cutoff
    _check_eigen(v, coeffs, N)
    out = np.zeros_like(v.coeffs)
    out[1:-2:2] = coeffs.plus.values[1:N + 1] * v.plus[1:]
    out[2:-2:2] = coeffs.minus.values[1:N + 1] * v.minus[1:]
    return TruncatedState(Basis.EIGEN, out, N)


def apply_raising(v: TruncatedState, coeffs: LadderPair) -> TruncatedState:
    """``A^+`` on an eigenbasis state.

    The top level has nowhere to go inside the cutoff; its image is dropped
    and ``truncation_loss`` is set when that image is nonzero.
    """
    N = v.cutoff
    _check_eigen(v, coeffs, N)
    out = np.zeros_like(v.coeffs)
    out[3::2] = np.conj(coeffs.plus.values[1:N + 1]) * v.plus[:-1]
    out[4::2] = np.conj(coeffs.minus.values[1:N + 1]) * v.minus[:-1]
    loss = False
    if coeffs.n_max > N:
        loss = bool(coeffs.plus.moduli[N + 1] * abs(v.plus[-1]) > 0
                    or coeffs.minus.moduli[N + 1] * abs(v.minus[-1]) > 0)
    else:
        loss = bool(abs(v.plus[-1]) > 0 or abs(v.minus[-1]) > 0)
    return TruncatedState(Basis.EIGEN, out, N, truncation_loss=loss or v.truncation_loss)


def lowering_matrix(coeffs: LadderPair, N: int) -> np.ndarray:
    """``A^-`` in the eigenbasis at cutoff N (singleton row/column zero)."""
    if coeffs.n_max < N:
        raise CutoffMismatch(f"coefficients stop at n={coeffs.n_max}, need {N}")
    M = np.zeros((2 * N + 3, 2 * N + 3), dtype=complex)
    for n in range(1, N + 1):
        M[1 + 2 * (n - 1), 1 + 2 * n] = coeffs.plus.values[n]
        M[2 + 2 * (n - 1), 2 + 2 * n] = coeffs.minus.values[n]
    return M


def raising_matrix(coeffs: LadderPair, N: int) -> np.ndarray:
    return lowering_matrix(coeffs, N).conj().T


@dataclass(frozen=True)
class MatrixElements:
    App: complex
    Apm: complex
    Amp: complex
    Amm: complex


def lowering_matrix_elements(n: int, table: SpectrumTable, coeffs: LadderPair) -> MatrixElements:
    """Nonzero product-basis entries of ``A^-`` around level ``n``.

    ``App = <n,+|A|n+1,+>``, ``Apm = <n,+|A|n+2,->``, ``Amp = <n,-|A|n,+>``,
    ``Amm = <n,-|A|n+1,->``.
    """
    if coeffs.n_max < n + 1 or table.n_max < n + 1:
        raise CutoffMismatch(f"level {n} needs coefficients and spectrum up to {n + 1}")
    s, c = table.sin_theta, table.cos_theta
    Kp, Km = coeffs.plus.values, coeffs.minus.values
    App = s[n] * s[n + 1] * Kp[n + 1] + c[n] * c[n + 1] * Km[n + 1]
    Apm = s[n] * c[n + 1] * Kp[n + 1] - c[n] * s[n + 1] * Km[n + 1]
    if n == 0:
        Amp = Amm = 0j
    else:
        Amp = c[n - 1] * s[n] * Kp[n] - s[n - 1] * c[n] * Km[n]
        Amm = c[n - 1] * c[n] * Kp[n] + s[n - 1] * s[n] * Km[n]
    return MatrixElements(complex(App), complex(Apm), complex(Amp), complex(Amm))


@dataclass(frozen=True)
class AlgebraResidual:
    res1_max: float
    res2_max: float

    @property
    def worst(self) -> float:
        return max(self.res1_max, self.res2_max)


def algebra_residual(coeffs: LadderPair, p0: float, q0: float, n_max: int | None = None) -> AlgebraResidual:
    """Largest violation of the two (p0, q0) commutation recursions.

    ``K0(n+1)**2 - q0 K0(n)**2 = p0**-n`` and ``K0(n+1)**2 - K0(n)**2/p0 = q0**n``.
    """
    n_top = coeffs.n_max - 1 if n_max is None else n_max
    if n_top + 1 > coeffs.n_max:
        raise CutoffMismatch(f"residual up to n={n_top} needs K0({n_top + 1})")
    res1 = res2 = 0.0
    n = np.arange(n_top + 1)
    for branch in BRANCHES:
        k2 = coeffs[branch].moduli[: n_top + 2] ** 2
        res1 = max(res1, float(np.max(np.abs(k2[1:] - q0 * k2[:-1] - p0 ** (-n.astype(float))))))
        res2 = max(res2, float(np.max(np.abs(k2[1:] - k2[:-1] / p0 - q0 ** n.astype(float)))))
    return AlgebraResidual(res1, res2)


def factorization_residual(table: SpectrumTable, scheme: LadderScheme, N: int) -> float:
    """Check ``H = A^+ c**(-2 Nhat) A^- + E_0`` on the product-basis towers.

    Builds the tower-diagonal operators as matrices on levels ``0..N`` and
    returns the largest absolute entry of the difference.
    """
    coeffs = bind_coefficients(scheme, table, n_max=N)
    c = table.model.qv_ratio
    size = 2 * (N + 1)
    lower = np.zeros((size, size), dtype=complex)
    for n in range(1, N + 1):
        lower[2 * (n - 1), 2 * n] = coeffs.plus.values[n]
        lower[2 * (n - 1) + 1, 2 * n + 1] = coeffs.minus.values[n]
    raise_ = lower.conj().T
    levels = np.repeat(np.arange(N + 1), 2)
    weight = np.diag(c ** (-2.0 * levels))
    ground = np.empty(size)
    ground[0::2] = table.E_plus[0]
    ground[1::2] = table.E_minus[0]
    target = np.empty(size)
    target[0::2] = table.E_plus[: N + 1]
    target[1::2] = table.E_minus[: N + 1]
    # the top row of A^+ A^- is exact; only A^- A^+ would feel the cutoff
    built = raise_ @ weight @ lower + np.diag(ground)
    return float(np.max(np.abs(built - np.diag(target))))
