import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pqjc.errors import CutoffMismatch, SpectrumNotBoundedBelow
from pqjc.ladder import (
    LadderScheme,
    algebra_residual,
    apply_lowering,
    apply_raising,
    bind_coefficients,
    factorization_residual,
    k_modulus,
    lowering_matrix,
    lowering_matrix_elements,
    raising_matrix,
)
from pqjc.pqmath import DeformationParams, basic_number
from pqjc.spectrum import Basis, JCModelParams, TruncatedState, build_spectrum, eigenvector_matrix

D = DeformationParams(1.2, 0.5)
MODEL = JCModelParams(d=D, epsilon=0.05, lam=0.3, mu=0.5)
TABLE = build_spectrum(MODEL, 70)


def random_eigen_state(rng, cutoff):
    size = 2 * cutoff + 3
    return TruncatedState(Basis.EIGEN, rng.normal(size=size) + 1j * rng.normal(size=size), cutoff)


def test_scheme_validation():
    with pytest.raises(ValueError):
        LadderScheme.algebra(0.9, 0.5)
    with pytest.raises(ValueError):
        LadderScheme.algebra(2.0, 0.6)
    with pytest.raises(ValueError):
        LadderScheme.custom([0.1, 1.0])
    with pytest.raises(ValueError):
        LadderScheme.custom([0.0, -1.0])
    assert LadderScheme.custom([0, 1, 2]).moduli == (0.0, 1.0, 2.0)


def test_k_modulus_examples():
    for scheme in (LadderScheme.algebra(1.2, 0.5), LadderScheme.action_identity(), LadderScheme.custom([0, 3])):
        assert k_modulus(scheme, TABLE, "+", 0) == 0.0
    assert k_modulus(LadderScheme.algebra(2.0, 0.25), TABLE, "+", 2) == pytest.approx(math.sqrt(0.75), rel=1e-15)
    assert k_modulus(LadderScheme.algebra(1, 1), TABLE, "-", 5) == pytest.approx(math.sqrt(5), rel=1e-15)


def test_action_identity_modulus():
    scheme = LadderScheme.action_identity()
    c = MODEL.qv_ratio
    for n in range(1, 5):
        expected = c ** (n - 1) * math.sqrt(TABLE.E_minus[n] - TABLE.E_minus[0])
        assert k_modulus(scheme, TABLE, "-", n) == pytest.approx(expected, rel=1e-15)
    # the + tower turns around at this deformation
    with pytest.raises(SpectrumNotBoundedBelow):
        bind_coefficients(scheme, TABLE, 10)


def test_phases_follow_energy_gaps():
    pair = bind_coefficients(LadderScheme.algebra(1.2, 0.5, tau_plus=0.7, tau_minus=-0.2), TABLE, 10)
    assert pair.plus.phases[0] == 0.0
    assert pair.plus.phases[4] == pytest.approx(0.7 * (TABLE.E_plus[4] - TABLE.E_plus[3]), rel=1e-15)
    assert pair.minus.phases[4] == pytest.approx(-0.2 * (TABLE.E_minus[4] - TABLE.E_minus[3]), rel=1e-15)
    assert np.allclose(np.abs(pair.plus.values), pair.plus.moduli, rtol=1e-15, atol=0)


def test_lowering_examples():
    fock = bind_coefficients(LadderScheme.algebra(1, 1), TABLE, 8)
    assert apply_lowering(TruncatedState.eigen_unit(8, None), fock).norm() == 0.0
    out = apply_lowering(TruncatedState.eigen_unit(8, 1, "+"), fock)
    assert np.allclose(out.coeffs, TruncatedState.eigen_unit(8, 0, "+").coeffs, atol=1e-15)


def test_raising_examples():
    pair = bind_coefficients(LadderScheme.algebra(D.p, D.q), TABLE, 8)
    assert apply_raising(TruncatedState.eigen_unit(8, None), pair).norm() == 0.0
    out = apply_raising(TruncatedState.eigen_unit(8, 0, "-"), pair)
    assert np.allclose(out.coeffs, TruncatedState.eigen_unit(8, 1, "-").coeffs, atol=1e-15)
    for n in range(7):
        v = TruncatedState.eigen_unit(8, n, "+")
        back = apply_lowering(apply_raising(v, pair), pair)
        assert np.allclose(back.coeffs, abs(pair.plus.values[n + 1]) ** 2 * v.coeffs, atol=1e-14)


def test_raising_flags_truncation_loss():
    pair = bind_coefficients(LadderScheme.algebra(D.p, D.q), TABLE, 8)
    assert not apply_raising(TruncatedState.eigen_unit(8, 3, "+"), pair).truncation_loss
    top = apply_raising(TruncatedState.eigen_unit(8, 8, "-"), pair)
    assert top.truncation_loss and top.norm() == 0.0


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(-2.0, 2.0), st.floats(-2.0, 2.0))
def test_adjointness(seed, tau_plus, tau_minus):
    rng = np.random.default_rng(seed)
    pair = bind_coefficients(LadderScheme.algebra(D.p, D.q, tau_plus, tau_minus), TABLE, 12)
    w, v = random_eigen_state(rng, 12), random_eigen_state(rng, 12)
    lhs = np.vdot(w.coeffs, apply_lowering(v, pair).coeffs)
    rhs = np.vdot(apply_raising(w, pair).coeffs, v.coeffs)
    assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs))
    M = lowering_matrix(pair, 12)
    assert np.allclose(M @ v.coeffs, apply_lowering(v, pair).coeffs, atol=1e-13)
    assert np.array_equal(raising_matrix(pair, 12), M.conj().T)


def test_cutoff_mismatch():
    pair = bind_coefficients(LadderScheme.algebra(D.p, D.q), TABLE, 5)
    with pytest.raises(CutoffMismatch):
        apply_lowering(TruncatedState.eigen_unit(8, 0), pair)
    with pytest.raises(CutoffMismatch):
        bind_coefficients(LadderScheme.algebra(D.p, D.q), build_spectrum(MODEL, 4), 9)


def product_matrix(table, pair, N):
    V = eigenvector_matrix(table, N)
    return V @ lowering_matrix(pair, N - 1) @ V.T


@pytest.mark.parametrize("scheme", [LadderScheme.algebra(1.2, 0.5, 0.3, 0.9), LadderScheme.algebra(1, 1),
                                    LadderScheme.custom(np.linspace(0, 3, 30) ** 0.5)])
def test_matrix_elements_against_basis_change(scheme):
    N = 20
    pair = bind_coefficients(scheme, TABLE, 25)
    P = product_matrix(TABLE, pair, N)
    for n in range(N - 3):
        el = lowering_matrix_elements(n, TABLE, pair)
        assert abs(el.App - P[2 * n, 2 * (n + 1)]) < 1e-12
        assert abs(el.Apm - P[2 * n, 2 * (n + 2) + 1]) < 1e-12
        assert abs(el.Amp - P[2 * n + 1, 2 * n]) < 1e-12
        assert abs(el.Amm - P[2 * n + 1, 2 * (n + 1) + 1]) < 1e-12


def test_matrix_elements_at_ground_level():
    pair = bind_coefficients(LadderScheme.algebra(D.p, D.q), TABLE, 5)
    el = lowering_matrix_elements(0, TABLE, pair)
    assert el.Amp == 0 and el.Amm == 0


def test_resonant_classical_elements():
    table = build_spectrum(JCModelParams(epsilon=0.0, lam=0.3), 12)
    pair = bind_coefficients(LadderScheme.algebra(1, 1), table, 12)
    for n in range(10):
        assert abs(lowering_matrix_elements(n, table, pair).Apm) < 1e-15


@pytest.mark.parametrize("p0,q0", [(1.0, 1.0), (1.2, 0.5), (1.2**0.5, 0.5**0.5), (2.0, 0.25), (1.0, 0.3)])
def test_algebra_scheme_satisfies_recursions(p0, q0):
    pair = bind_coefficients(LadderScheme.algebra(p0, q0), TABLE, 65)
    res = algebra_residual(pair, p0, q0, 64)
    assert res.res1_max < 1e-12 and res.res2_max < 1e-12


ALGEBRA_PAIRS = st.one_of(
    st.tuples(st.floats(1.01, 3.0), st.floats(0.05, 0.95)).filter(lambda t: t[0] * t[1] < 0.98),
    st.tuples(st.just(1.0), st.floats(0.05, 1.0)),
)


@settings(max_examples=40, deadline=None)
@given(ALGEBRA_PAIRS)
def test_algebra_recursions_property(pair_pq):
    p0, q0 = pair_pq
    pair = bind_coefficients(LadderScheme.algebra(p0, q0), TABLE, 40)
    assert algebra_residual(pair, p0, q0).worst < 1e-11 * max(1.0, basic_number(40, DeformationParams(p0, q0)))


def test_action_identity_breaks_the_algebra():
    model = JCModelParams(d=DeformationParams(1.0, 0.5), epsilon=0.05, lam=0.3, mu=0.5)
    table = build_spectrum(model, 30)
    pair = bind_coefficients(LadderScheme.action_identity(), table, 30)
    assert algebra_residual(pair, 1.0, 0.5).worst > 1e-3


def test_factorization_classical():
    table = build_spectrum(JCModelParams(epsilon=0.05, lam=0.3), 30)
    assert factorization_residual(table, LadderScheme.action_identity(), 30) < 1e-12


def test_factorization_deformed():
    table = build_spectrum(MODEL, 10)
    assert factorization_residual(table, LadderScheme.action_identity(), 6) < 1e-10
    with pytest.raises(SpectrumNotBoundedBelow):
        factorization_residual(table, LadderScheme.action_identity(), 7)
    arik = build_spectrum(MODEL.with_(d=DeformationParams(1.0, 0.5)), 40)
    assert factorization_residual(arik, LadderScheme.action_identity(), 40) < 1e-10


def test_factorization_ground_term():
    table = build_spectrum(MODEL, 3)
    pair = bind_coefficients(LadderScheme.action_identity(), table, 3)
    assert MODEL.qv_ratio**0 * pair.plus.moduli[0] ** 2 + table.E_plus[0] == table.E_plus[0]
