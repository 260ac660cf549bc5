"""Exact spectrum of the deformed Jaynes-Cummings Hamiltonian.

The Hamiltonian conserves the excitation number, so it splits into the
singleton ``|0,->`` and 2x2 blocks on ``(|n,+>, |n+1,->)``. Each block is
diagonalized in closed form. A dense truncated matrix built straight from
the operator definition serves as an independent check.

Index layouts used throughout the package:

* product basis, cutoff N: index ``2n`` is ``|n,+>``, ``2n+1`` is ``|n,->``;
  length ``2(N+1)``.
* eigenbasis, cutoff N: index 0 is the singleton, ``1+2n`` is ``|E_n^+>``,
  ``2+2n`` is ``|E_n^->``; length ``2N+3``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Callable

import numpy as np

from .errors import AmbiguousSign, CutoffMismatch, OracleMismatch
from .pqmath import DeformationParams, basic_number, turnaround_index

DEGENERACY_TOL = 1e-9


def sign(x: float) -> float:
    """Sign with the convention ``sign(0) = +1``."""
    return -1.0 if x < 0 else 1.0


# Named h(p, q) options; each is positive and tends to 1 at p = q = 1.
H_FUNCTIONS: dict[str, Callable[[float, float], float]] = {
    "pq": lambda p, q: p * q,
    "sqrt_pq": lambda p, q: math.sqrt(p * q),
    "inverse_p": lambda p, q: 1.0 / p,
}


@dataclass(frozen=True)
class HChoice:
    """The positive prefactor of the number term: a constant or a named function."""

    value: float = 1.0
    tag: str | None = None

    def __post_init__(self):
        if self.tag is None:
            if not (self.value > 0 and math.isfinite(self.value)):
                raise ValueError(f"h constant must be positive, got {self.value}")
        elif self.tag not in H_FUNCTIONS:
            raise ValueError(f"unknown h tag {self.tag!r}; choose from {sorted(H_FUNCTIONS)}")

    @classmethod
    def constant(cls, value: float = 1.0) -> "HChoice":
        return cls(value=float(value))

    @classmethod
    def custom(cls, tag: str) -> "HChoice":
        return cls(tag=tag)

    def evaluate(self, d: DeformationParams) -> float:
        if self.tag is None:
            return self.value
        return H_FUNCTIONS[self.tag](d.p, d.q)


@dataclass(frozen=True)
class JCModelParams:
    d: DeformationParams = field(default_factory=DeformationParams)
    epsilon: float = 0.0
    lam: float = 0.0
    omega0: float = 1.0
    h_choice: HChoice = field(default_factory=HChoice)
    mu: float = 0.0
    nu: float = 0.0

    def __post_init__(self):
        if not (self.omega0 > 0 and math.isfinite(self.omega0)):
            raise ValueError(f"omega0 must be positive, got {self.omega0}")
        for name in ("epsilon", "lam", "mu", "nu"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    @property
    def h_value(self) -> float:
        return self.h_choice.evaluate(self.d)

    @property
    def qv_ratio(self) -> float:
        """``q**mu / p**nu``, the eigenvalue base of the deformation operator."""
        return self.d.q**self.mu / self.d.p**self.nu

    def with_(self, **changes) -> "JCModelParams":
        from dataclasses import replace

        return replace(self, **changes)


@dataclass(frozen=True)
class LevelData:
    n: int
    script_E: float
    Q: float
    sin_theta: float
    cos_theta: float
    E_plus: float
    E_minus: float
    zeeman: float
    crossing: bool = False


@dataclass(frozen=True)
class SpectrumDiagnostics:
    turnaround_n0: int | None
    degenerate_pairs: tuple[tuple[int, int, float], ...]
    min_E_minus: float
    crossings: tuple[int, ...]


def _level(model: JCModelParams, n: int, b_n: float, b_n1: float) -> LevelData:
    one_eps = 1.0 + model.epsilon
    h = model.h_value
    script_E = one_eps * h * (b_n1 - b_n) - 1.0
    coupling = model.lam * math.sqrt(b_n1)
    Q = math.hypot(0.5 * script_E, coupling)
    mean = 0.5 * one_eps * (h * (b_n1 + b_n) + 1.0)
    if Q == 0.0:
        s = c = math.sqrt(0.5)
        crossing = True
    elif script_E >= 0:
        # the root without cancellation first, the other from sin 2t = coupling / Q
        c = math.sqrt((Q + 0.5 * script_E) / (2.0 * Q))
        s = coupling / (2.0 * Q * c)
        crossing = False
    else:
        s = sign(model.lam) * math.sqrt((Q - 0.5 * script_E) / (2.0 * Q))
        c = coupling / (2.0 * Q * s)
        crossing = False
    return LevelData(n=n, script_E=script_E, Q=Q, sin_theta=s, cos_theta=c,
                     E_plus=mean + Q, E_minus=mean - Q, zeeman=2.0 * Q, crossing=crossing)


@dataclass(frozen=True)
class SpectrumTable:
    model: JCModelParams
    singleton_energy: float
    levels: tuple[LevelData, ...]
    diagnostics: SpectrumDiagnostics

    @property
    def n_max(self) -> int:
        return len(self.levels) - 1

    @cached_property
    def E_plus(self) -> np.ndarray:
        return np.array([lv.E_plus for lv in self.levels])

    @cached_property
    def E_minus(self) -> np.ndarray:
        return np.array([lv.E_minus for lv in self.levels])

    @cached_property
    def sin_theta(self) -> np.ndarray:
        return np.array([lv.sin_theta for lv in self.levels])

    @cached_property
    def cos_theta(self) -> np.ndarray:
        return np.array([lv.cos_theta for lv in self.levels])

    def energies(self, branch: str) -> np.ndarray:
        return self.E_plus if branch == "+" else self.E_minus

    def eigen_energies(self) -> np.ndarray:
        """Energies in eigenbasis index order (singleton first)."""
        out = np.empty(2 * self.n_max + 3)
        out[0] = self.singleton_energy
        out[1::2] = self.E_plus
        out[2::2] = self.E_minus
        return out


def _degenerate_pairs(energies: np.ndarray) -> tuple[tuple[int, int, float], ...]:
    order = np.argsort(energies, kind="stable")
    pairs = []
    for a, b in zip(order[:-1], order[1:]):
        gap = float(energies[b] - energies[a])
        if gap < DEGENERACY_TOL * max(1.0, abs(float(energies[a]))):
            i, j = sorted((int(a), int(b)))
            pairs.append((i, j, gap))
    return tuple(sorted(pairs))


def build_spectrum(model: JCModelParams, n_max: int) -> SpectrumTable:
    """Closed-form eigenpairs for levels ``n = 0..n_max`` plus the singleton."""
    if n_max < 0:
        raise ValueError("n_max must be non-negative")
    b = [basic_number(k, model.d) for k in range(n_max + 2)]
    levels = tuple(_level(model, n, b[n], b[n + 1]) for n in range(n_max + 1))
    singleton = 0.5 * model.epsilon
    energies = np.empty(2 * n_max + 3)
    energies[0] = singleton
    energies[1::2] = [lv.E_plus for lv in levels]
    energies[2::2] = [lv.E_minus for lv in levels]
    n0 = turnaround_index(model.d, n_max + 1)
    diagnostics = SpectrumDiagnostics(
        turnaround_n0=n0,
        degenerate_pairs=_degenerate_pairs(energies),
        min_E_minus=min(lv.E_minus for lv in levels),
        crossings=tuple(lv.n for lv in levels if lv.crossing),
    )
    return SpectrumTable(model=model, singleton_energy=singleton, levels=levels,
                         diagnostics=diagnostics)


def build_hamiltonian_matrix(model: JCModelParams, N: int) -> np.ndarray:
    """Dense Hamiltonian on the product basis with Fock levels ``0..N``.

    Built from the operator definition: number term, spin term and the
    rotating-wave coupling ``a^dag sigma_- + a sigma_+``.
    """
    if N < 1:
        raise ValueError("N must be positive")
    size = 2 * (N + 1)
    H = np.zeros((size, size))
    one_eps = 1.0 + model.epsilon
    h = model.h_value
    b = [basic_number(k, model.d) for k in range(N + 1)]
    for n in range(N + 1):
        number = one_eps * (h * b[n] + 0.5)
        H[2 * n, 2 * n] = number + 0.5
        H[2 * n + 1, 2 * n + 1] = number - 0.5
        if n < N:
            # a sigma_+ takes |n+1,-> to sqrt([n+1]) |n,+>
            g = model.lam * math.sqrt(b[n + 1])
            H[2 * n, 2 * (n + 1) + 1] = g
            H[2 * (n + 1) + 1, 2 * n] = g
    return H


def eigenvector_matrix(table: SpectrumTable, N: int) -> np.ndarray:
    """Columns are ``|E_*>, |E_0^+>, |E_0^->, ...`` expanded in the product basis.

    Towers ``n <= N-1`` are included; each needs Fock level ``n+1 <= N``.
    Result has shape ``(2(N+1), 2N+1)``.
    """
    if table.n_max < N - 1:
        raise CutoffMismatch(f"table has n_max={table.n_max}, need >= {N - 1}")
    V = np.zeros((2 * (N + 1), 2 * N + 1))
    V[1, 0] = 1.0
    for n in range(N):
        lv = table.levels[n]
        plus, minus_up = 2 * n, 2 * (n + 1) + 1
        V[plus, 1 + 2 * n] = lv.sin_theta
        V[minus_up, 1 + 2 * n] = lv.cos_theta
        V[plus, 2 + 2 * n] = lv.cos_theta
        V[minus_up, 2 + 2 * n] = -lv.sin_theta
    return V


@dataclass(frozen=True)
class SpectrumReport:
    max_residual: float
    matched_levels: int
    max_eigenvalue_gap: float


def verify_spectrum(model: JCModelParams, N: int, tol: float = 1e-10,
                    table: SpectrumTable | None = None) -> SpectrumReport:
    """Compare closed-form eigenpairs with the truncated matrix.

    Only towers ``n <= N-2`` are checked; the top Fock level couples to a
    state outside the truncation.
    """
    if N < 2:
        raise ValueError("N must be >= 2")
    H = build_hamiltonian_matrix(model, N)
    table = table if table is not None else build_spectrum(model, N)
    V = eigenvector_matrix(table, N)
    E = table.eigen_energies()
    keep = 2 * (N - 1) + 1
    V, E = V[:, :keep], E[:keep]
    residual = H @ V - V * E
    max_res = float(np.max(np.linalg.norm(residual, axis=0)))
    numeric = np.linalg.eigvalsh(H)
    gap = float(max(np.min(np.abs(numeric - e)) for e in E))
    if max_res > tol:
        raise OracleMismatch(f"closed-form eigenpairs off by {max_res:.3e} > {tol:.1e}")
    return SpectrumReport(max_residual=max_res, matched_levels=keep, max_eigenvalue_gap=gap)


class Basis(Enum):
    PRODUCT = "ProductBasis"
    EIGEN = "EigenBasis"


@dataclass(frozen=True)
class TruncatedState:
    basis: Basis
    coeffs: np.ndarray
    cutoff: int
    truncation_loss: bool = False

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=complex)
        expected = 2 * (self.cutoff + 1) if self.basis is Basis.PRODUCT else 2 * self.cutoff + 3
        if coeffs.shape != (expected,):
            raise CutoffMismatch(f"{self.basis.value} with cutoff {self.cutoff} needs "
                                 f"{expected} coefficients, got {coeffs.shape}")
        if not np.all(np.isfinite(coeffs)):
            raise ValueError("coefficients must be finite")
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def zeros(cls, basis: Basis, cutoff: int) -> "TruncatedState":
        size = 2 * (cutoff + 1) if basis is Basis.PRODUCT else 2 * cutoff + 3
        return cls(basis, np.zeros(size, dtype=complex), cutoff)

    @classmethod
    def eigen_unit(cls, cutoff: int, n: int | None, branch: str = "+") -> "TruncatedState":
        """Unit vector on ``|E_n^branch>``, or on the singleton when ``n`` is None."""
        v = np.zeros(2 * cutoff + 3, dtype=complex)
        v[eigen_index(n, branch)] = 1.0
        return cls(Basis.EIGEN, v, cutoff)

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    @property
    def plus(self) -> np.ndarray:
        """Tower ``+`` amplitudes for ``n = 0..cutoff``."""
        return self.coeffs[0::2] if self.basis is Basis.PRODUCT else self.coeffs[1::2]

    @property
    def minus(self) -> np.ndarray:
        return self.coeffs[1::2] if self.basis is Basis.PRODUCT else self.coeffs[2::2]


def eigen_index(n: int | None, branch: str = "+") -> int:
    if n is None:
        return 0
    return 1 + 2 * n + (0 if branch == "+" else 1)


def _check_table(table: SpectrumTable, cutoff: int) -> None:
    if table.n_max < cutoff:
        raise CutoffMismatch(f"spectrum table stops at n={table.n_max}, state needs {cutoff}")


def to_eigenbasis(v: TruncatedState, table: SpectrumTable) -> TruncatedState:
    """Apply ``U``: ``|n,+-> -> |E_n^+->``."""
    if v.basis is not Basis.PRODUCT:
        raise ValueError("to_eigenbasis expects a product-basis state")
    _check_table(table, v.cutoff)
    out = np.zeros(2 * v.cutoff + 3, dtype=complex)
    out[1:] = v.coeffs
    return TruncatedState(Basis.EIGEN, out, v.cutoff)


def from_eigenbasis(v: TruncatedState, table: SpectrumTable) -> TruncatedState:
    """Apply ``U^dag``: ``|E_n^+-> -> |n,+->`` and the singleton to zero."""
    if v.basis is not Basis.EIGEN:
        raise ValueError("from_eigenbasis expects an eigenbasis state")
    _check_table(table, v.cutoff)
    return TruncatedState(Basis.PRODUCT, v.coeffs[1:].copy(), v.cutoff)


def expand_in_product_basis(v: TruncatedState, table: SpectrumTable) -> np.ndarray:
    """Physical product-basis vector (Fock levels ``0..cutoff+1``) of an eigenbasis state."""
    if v.basis is not Basis.EIGEN:
        raise ValueError("expects an eigenbasis state")
    _check_table(table, v.cutoff)
    V = eigenvector_matrix(table, v.cutoff + 1)
    return V @ v.coeffs


@dataclass(frozen=True)
class DecoupledLevel:
    n: int
    s_n: int
    E_plus: float
    E_minus: float
    state_assignment: str


def decoupled_spectrum(model: JCModelParams, n: int) -> DecoupledLevel:
    """Closed-form branch assignment at zero coupling.

    Raises AmbiguousSign at a level crossing, where the detuning
    function of the level vanishes.
    """
    if model.lam != 0:
        raise ValueError("decoupled spectrum requires lambda = 0")
    d = model.d
    one_eps = 1.0 + model.epsilon
    h = model.h_value
    b_n, b_n1 = basic_number(n, d), basic_number(n + 1, d)
    script_E = one_eps * h * (b_n1 - b_n) - 1.0
    if abs(script_E) < DEGENERACY_TOL:
        raise AmbiguousSign(f"level crossing at n={n}: E([n+1]) = {script_E:.3e}")
    upper = one_eps * h * b_n1 + 0.5 * one_eps - 0.5    # |n+1,->
    lower = one_eps * h * b_n + 0.5 * one_eps + 0.5     # |n,+>
    if script_E > 0:
        return DecoupledLevel(n, 1, upper, lower, f"E+ = |{n + 1},->, E- = |{n},+>")
    return DecoupledLevel(n, -1, lower, upper, f"E+ = |{n},+>, E- = -|{n + 1},->")
