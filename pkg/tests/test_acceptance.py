"""End-to-end acceptance criteria; the conftest summary hook prints one PASS/FAIL line per criterion."""

import cmath
import itertools
import math
import time

import numpy as np
import pytest

from pqjc.ladder import LadderScheme, algebra_residual, bind_coefficients
from pqjc.moments import WeightChoice, ramanujan_classical, ramanujan_pq, verify_moments
from pqjc.pqmath import (
    DeformationParams,
    RadiusKind,
    SeriesFamily,
    basic_number,
    cal_E_pq,
    classify_radius,
    e_pq,
    e_q,
    jackson_Eq,
    pq_shifted_factorial,
    q_pochhammer,
)
from pqjc.spectrum import JCModelParams, build_hamiltonian_matrix, build_spectrum, decoupled_spectrum, verify_spectrum
from pqjc.vcs import (
    VCSParams,
    action_identity_residual,
    annihilation_residual,
    atomic_inversion,
    branch_radius,
    build_vcs,
    coefficient_recursion_residual,
    evolve,
    evolve_by_phase,
)

PQ_GRID = [(1.0, 1.0), (1.0, 0.5), (1.2, 0.5), (2.0, 0.25)]
D = DeformationParams(1.2, 0.5)
MODEL = JCModelParams(d=D, epsilon=0.05, lam=0.3, mu=0.5)


@pytest.fixture
def criterion(record_property):
    """Attach the criterion label, tolerance and worst measured value to the test report."""

    def tag(number, title, tolerance):
        record_property("criterion", f"{number:>2} {title}")
        record_property("tolerance", tolerance)

    def measured(value):
        record_property("measured", value)

    tag.measured = measured
    return tag


def grid_models():
    for pq, eps, lam in itertools.product(PQ_GRID, (0.0, 0.05), (0.0, 0.3)):
        yield JCModelParams(d=DeformationParams(*pq), epsilon=eps, lam=lam)


def radius_value(scheme, model):
    plus, minus = branch_radius(scheme, model, "+"), branch_radius(scheme, model, "-")
    return min(plus.as_float, minus.as_float)


def test_criterion_01_spectrum_oracle(criterion):
    criterion(1, "spectrum oracle, 16-point grid, N=20", "residual 1e-10, classical 1e-12, < 1 s")
    start = time.perf_counter()
    worst, worst_classical = 0.0, 0.0
    for model in grid_models():
        worst = max(worst, verify_spectrum(model, 20).max_residual)
        if model.d.p == model.d.q == 1.0:
            for lv in build_spectrum(model, 20).levels:
                root = math.sqrt(model.epsilon**2 / 4 + model.lam**2 * (lv.n + 1))
                base = (1 + model.epsilon) * (lv.n + 1)
                worst_classical = max(worst_classical, abs(lv.E_plus - base - root), abs(lv.E_minus - base + root))
    elapsed = time.perf_counter() - start
    criterion.measured(f"residual {worst:.2e}, classical {worst_classical:.2e}, {elapsed:.2f} s")
    assert worst <= 1e-10
    assert worst_classical <= 1e-12
    assert elapsed < 1.0


def test_criterion_02_singleton(criterion):
    criterion(2, "singleton energy is eps/2 bitwise", "exact")
    energies = {}
    for model in grid_models():
        table = build_spectrum(model, 20)
        assert table.singleton_energy == model.epsilon / 2
        energies.setdefault((model.epsilon, model.lam), set()).add(table.singleton_energy)
    assert all(len(values) == 1 for values in energies.values())
    criterion.measured("identical across (p,q)")


def test_criterion_03_ladder_recursions(criterion):
    criterion(3, "Algebra(p0,q0) recursions, n <= 64", "1e-12")
    table = build_spectrum(MODEL, 70)
    alpha = 0.5
    worst = 0.0
    for p0, q0 in [(1.0, 1.0), (D.p, D.q), (D.p**alpha, D.q**alpha)]:
        pair = bind_coefficients(LadderScheme.algebra(p0, q0), table, 65)
        worst = max(worst, algebra_residual(pair, p0, q0, 64).worst)
    criterion.measured(f"{worst:.2e}")
    assert worst <= 1e-12


def test_criterion_04_vcs_contracts(criterion):
    criterion(4, "VCS contracts on 3x3 (z, theta) grid", "norm/recursion 1e-10, annihilation 1e-8, evolve 1e-12, < 5 s")
    scheme = LadderScheme.algebra(D.p, D.q, tau_plus=0.2, tau_minus=-0.1)
    start = time.perf_counter()
    z_edge = 0.9 * min(radius_value(scheme, MODEL), 3.0)
    norm_err = rec = ann = evo = 0.0
    for z, theta in itertools.product((0.0, 0.4, z_edge), (0.0, math.pi / 4, math.pi / 2)):
        psi = build_vcs(VCSParams(z=z, theta=theta, phi=0.3, scheme=scheme, model=MODEL))
        norm_err = max(norm_err, abs(psi.total_norm() - 1.0))
        rec = max(rec, coefficient_recursion_residual(psi))
        ann = max(ann, annihilation_residual(psi))
        for t in (0.5, 3.0):
            rebuilt = evolve(psi, t)
            plus, minus = evolve_by_phase(psi, t)
            evo = max(evo, np.max(np.abs(rebuilt.coeff_plus - plus)), np.max(np.abs(rebuilt.coeff_minus - minus)))
    elapsed = time.perf_counter() - start
    criterion.measured(f"norm {norm_err:.1e}, rec {rec:.1e}, ann {ann:.1e}, evolve {evo:.1e}, {elapsed:.2f} s")
    assert norm_err <= 1e-10 and rec <= 1e-10
    assert ann <= 1e-8 and evo <= 1e-12
    assert elapsed < 5.0


def test_criterion_05_classical_limit(criterion):
    criterion(5, "classical-limit VCS coefficients", "relative 1e-10")
    model = JCModelParams(epsilon=0.05, lam=0.3, mu=0.0, nu=0.0)
    worst = 0.0
    for z, theta, phi in [(1.1 - 0.4j, 0.6, 1.3), (0.3, 1.2, 0.0), (2.0j, 0.1, 5.0)]:
        psi = build_vcs(VCSParams(z=z, theta=theta, phi=phi, scheme=LadderScheme.algebra(1, 1), model=model), 80)
        for n in range(25):
            poisson = z**n * math.exp(-abs(z) ** 2 / 2) / math.sqrt(math.factorial(n))
            for got, want in ((psi.coeff_plus[n], math.cos(theta) * poisson),
                              (psi.coeff_minus[n], cmath.exp(1j * phi) * math.sin(theta) * poisson)):
                if want != 0:
                    worst = max(worst, abs(got - want) / abs(want))
    criterion.measured(f"{worst:.2e}")
    assert worst <= 1e-10


def test_criterion_06_moments(criterion):
    criterion(6, "moment problem (Fock n<=10, PQ and Alpha(0.5) n<=8)", "Fock 1e-8, deformed 1e-6, < 30 s")
    start = time.perf_counter()
    fock = verify_moments(WeightChoice.fock(), MODEL, 10).max_rel_err
    pq = verify_moments(WeightChoice.pq_explicit(), MODEL, 8).max_rel_err
    alpha = verify_moments(WeightChoice.alpha_family(0.5), MODEL, 8).max_rel_err
    elapsed = time.perf_counter() - start
    criterion.measured(f"Fock {fock:.1e}, PQ {pq:.1e}, Alpha {alpha:.1e}, {elapsed:.2f} s")
    assert fock <= 1e-8
    assert max(pq, alpha) <= 1e-6
    assert elapsed < 30.0


def test_criterion_07_ramanujan(criterion):
    criterion(7, "Ramanujan integrals and p=1 reduction", "rel 1e-6, reduction 1e-7")
    classical = max(ramanujan_classical(n, 0.5).rel_err for n in range(6))
    deformed = max(ramanujan_pq(n, lam0, D).rel_err for n in range(6) for lam0 in (1.0, 2.0))
    reduction = 0.0
    for n in range(6):
        reduced = ramanujan_pq(n, 1.0, DeformationParams(1.0, 0.5))
        plain = ramanujan_classical(n, 0.5)
        reduction = max(reduction, abs(reduced.rhs - plain.rhs) / abs(plain.rhs),
                        abs(reduced.lhs - plain.lhs) / abs(plain.lhs))
    criterion.measured(f"classical {classical:.1e}, pq {deformed:.1e}, reduction {reduction:.1e}")
    assert classical <= 1e-6 and deformed <= 1e-6
    assert reduction <= 1e-7


def test_criterion_08_dynamics(criterion):
    criterion(8, "atomic inversion: flat at lambda=0, bounded always", "spread 1e-12, bound 1+1e-9")
    times = np.linspace(0.0, 100.0, 1000)
    scheme = LadderScheme.algebra(D.p, D.q)
    spread, peak = 0.0, 0.0
    for eps, theta, phi in [(0.05, 0.8, 1.0), (-0.3, math.pi / 4, 0.0), (0.4, 2.0, 3.0)]:
        psi = build_vcs(VCSParams(z=0.9, theta=theta, phi=phi, scheme=scheme, model=MODEL.with_(epsilon=eps, lam=0.0)))
        values = atomic_inversion(psi, times)
        spread = max(spread, float(np.ptp(values)))
        peak = max(peak, float(np.max(np.abs(values))))
    for lam, z in itertools.product((0.3, 0.8, -1.0), (0.4, 1.5 + 0.5j, 2.5)):
        psi = build_vcs(VCSParams(z=z, theta=0.7, phi=0.2, scheme=scheme, model=MODEL.with_(lam=lam)))
        peak = max(peak, float(np.max(np.abs(atomic_inversion(psi, times)))))
    criterion.measured(f"spread {spread:.1e}, max |sigma3| {peak:.12f}")
    assert spread < 1e-12
    assert peak <= 1 + 1e-9


def test_criterion_09_action_identity(criterion):
    criterion(9, "action identity holds for its scheme, fails for Algebra(p,q)", "hold 1e-8, fail > 1e-3")
    arik = MODEL.with_(d=DeformationParams(1.0, 0.5))
    scheme = LadderScheme.action_identity()
    R = radius_value(scheme, arik)
    held = max(action_identity_residual(build_vcs(VCSParams(z=frac * R * cmath.exp(0.3j), theta=0.7, phi=0.0,
                                                            scheme=scheme, model=arik), 400))
               for frac in (0.1, 0.5, 0.9))
    algebra = LadderScheme.algebra(D.p, D.q)
    z_mid = 0.5 * min(radius_value(algebra, MODEL), 3.0)
    broken = action_identity_residual(build_vcs(VCSParams(z=z_mid, theta=0.7, phi=0.0, scheme=algebra, model=MODEL)))
    criterion.measured(f"held {held:.1e} (R={R:.4f}), Algebra residual {broken:.3f}")
    assert held <= 1e-8
    assert broken > 1e-3


def test_criterion_10_special_functions(criterion):
    criterion(10, "inversion identities, bridge identity, radius rows", "inversion 1e-9, bridge rel 1e-10")
    grid = np.linspace(-0.95, 0.95, 20)
    inv_q = max(abs(jackson_Eq(-z, 0.5) * e_q(z, 0.5) - 1) for z in grid)
    # the partner keeps the p^(n(n-1)/2) factor
    inv_pq = max(abs(cal_E_pq(-z / (D.p * D.q) ** 0.5, 0.5, 0.0, D) * e_pq(z, D) - 1)
                 for z in grid * D.p**-0.5)
    bridge = 0.0
    for (p, q), mu, nu in itertools.product(PQ_GRID[1:], (0.0, 0.5, 1.0), (0.0, 0.5)):
        d = DeformationParams(p, q)
        a, b = p**mu, q**nu
        for n in range(21):
            lhs = pq_shifted_factorial(a, b, d, n)
            rhs = p ** (-mu * n - n * (n - 1) / 2) * q_pochhammer(a * b, p * q, n)
            # a vanishing factor makes both sides exactly zero
            bridge = max(bridge, abs(lhs - rhs) / abs(rhs) if rhs else abs(lhs))
    rows = []
    for mu, nu, d, kind in [(0.5, 0.5, D, RadiusKind.INFINITE), (0.0, 0.5, DeformationParams(2.0, 0.25),
                                                                    RadiusKind.FINITE),
                            (0.0, 0.0, DeformationParams(1.5, 0.5), RadiusKind.ZERO)]:
        c = d.q**mu / d.p**nu

        def log_term(n):
            return n * n * math.log(c) - math.fsum(math.log(d.p**-k - d.q**k) for k in range(1, n + 1))

        empirical = math.exp((log_term(120) - log_term(100)) / 20)
        r = classify_radius(SeriesFamily.CAL_E, mu, nu, d)
        if kind is RadiusKind.INFINITE:
            rows.append(r.kind is kind and empirical < 1e-6)
        elif kind is RadiusKind.ZERO:
            rows.append(r.kind is kind and empirical > 1e6)
        else:
            rows.append(r.kind is kind and abs(1 / empirical - r.value) < 1e-6 * r.value)
    criterion.measured(f"q {inv_q:.1e}, pq {inv_pq:.1e}, bridge {bridge:.1e}, radius rows {sum(rows)}/3")
    assert inv_q <= 1e-9 and inv_pq <= 1e-9
    assert bridge <= 1e-10
    assert all(rows)


def test_criterion_11_decoupled_limit(criterion):
    criterion(11, "decoupled branches vs lambda=0 diagonal as multisets", "1e-12")
    N = 20
    worst = 0.0
    for pq, eps in itertools.product(PQ_GRID, (0.05, -0.3, 0.4)):
        model = JCModelParams(d=DeformationParams(*pq), epsilon=eps, lam=0.0)
        diagonal = np.sort(np.diag(build_hamiltonian_matrix(model, N)))
        closed = [model.epsilon / 2]
        for n in range(N):
            lv = decoupled_spectrum(model, n)
            closed += [lv.E_plus, lv.E_minus]
        # |N,+> pairs with a level beyond the cutoff
        closed.append((1 + eps) * (basic_number(N, model.d) + 0.5) + 0.5)
        worst = max(worst, float(np.max(np.abs(np.sort(closed) - diagonal))))
    criterion.measured(f"{worst:.2e}")
    assert worst <= 1e-12
