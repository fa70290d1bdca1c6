import numpy as np
import pytest
from hypothesis import given, strategies as st

from gaussweyl.beals import (
    BisymbolProbe,
    ReconstructionConfig,
    beals_seminorm_estimate,
    bisymbol,
    commutator_chain,
    complex_cholesky,
    compose_symbols,
    compress,
    empirical_K,
    heat_check,
    heat_kernel_explicit,
    heat_kernel_form,
    ibp_budget,
    kernel_s_integral,
    padded_commutators,
    product_matrix,
    reconstruct_symbol,
    reconstruction_bound_factor,
    reconstruction_report,
    regularized_g,
)
from gaussweyl.gaussian_rep import GaussianRep, TruncationError
from gaussweyl.metaplectic import u_of
from gaussweyl.phase_space import QuadraticForm, cv_bound_factor, random_symplectic
from gaussweyl.quantize import weyl_norm, weyl_quantize, weyl_translate, wick_symbol
from gaussweyl.symbols import ConstantSymbol, LinearSymbol, TrigSymbol, direction_pool

H = 0.5
REP = GaussianRep(1, 40, H)
COS = TrigSymbol([1.0], [[0.6, 0.8]], [0.4])
M_COS = weyl_quantize(COS, REP)
PROBES = np.array([[0.0, 0.0], [0.3, -0.2], [-0.4, 0.1], [0.2, 0.5], [-0.1, -0.3]])


# bisymbol


def test_bisymbol_identity():
    for X, Y in [(PROBES[1], PROBES[2]), (PROBES[3], PROBES[0])]:
        assert bisymbol(np.eye(REP.size), X, Y, REP) == pytest.approx(1.0, abs=1e-12)


def test_bisymbol_diagonal_is_wick():
    w = wick_symbol(M_COS, REP)(PROBES)
    got = np.array([bisymbol(M_COS, X, X, REP) for X in PROBES])
    assert np.abs(got - w).max() <= 1e-8


def test_bisymbol_linear_matches_direct_inner_products(rng):
    M = weyl_quantize(LinearSymbol([0.7, -0.3]), REP)
    for _ in range(10):
        X, Y = rng.uniform(-0.5, 0.5, (2, 2))
        px, py = REP.coherent(X).coeffs, REP.coherent(Y).coeffs
        direct = np.vdot(py, M @ px) / np.vdot(py, px)
        assert bisymbol(M, X, Y, REP) == pytest.approx(direct, abs=1e-10)


def test_bisymbol_growth_and_holomorphy(rng):
    probe = BisymbolProbe(M_COS, REP)
    nrm = weyl_norm(M_COS, REP, margin=0)
    for _ in range(10):
        X, Y = rng.uniform(-0.6, 0.6, (2, 2))
        assert abs(probe(X, Y)) <= nrm * np.exp(np.sum((X - Y) ** 2) / (4 * H)) * (1 + 1e-10)
        assert probe.holomorphy_residual(X, Y) <= 1e-5


def test_bisymbol_underflow_floor():
    with pytest.raises(TruncationError):
        bisymbol(np.eye(REP.size), [10.0, 0.0], [-10.0, 0.0], REP)


def test_diag_derivative_matches_finite_difference(rng):
    probe = BisymbolProbe(M_COS, REP)
    X, Y = rng.uniform(-0.4, 0.4, (2, 2))
    V = rng.standard_normal(2)
    e = 1e-4
    fd = (probe(X + e * V, Y + e * V) - probe(X - e * V, Y - e * V)) / (2 * e)
    assert probe.diag_derivative(X, Y, [V]) == pytest.approx(fd, abs=1e-6)


@pytest.mark.parametrize("m", [1, 2])
def test_diagonal_derivative_bound(rng, m):
    A = QuadraticForm.identity(1)
    prof = beals_seminorm_estimate(M_COS, REP, A, m, probes=8, rng=rng)
    probe = BisymbolProbe(M_COS, REP)
    for _ in range(5):
        X, Y = rng.uniform(-0.4, 0.4, (2, 2))
        Vs = list(rng.standard_normal((m, 2)))
        lhs = abs(probe.diag_derivative(X, Y, Vs))
        rhs = prof[m] * np.exp(np.sum((X - Y) ** 2) / (4 * H)) * np.prod([np.linalg.norm(v) for v in Vs])
        assert lhs <= rhs * 1.05


# commutator profiles


def test_profile_identity():
    prof = beals_seminorm_estimate(np.eye(REP.size), REP, QuadraticForm.identity(1), 2)
    assert prof[0] == pytest.approx(1.0)
    assert prof[1] <= 1e-12 and prof[2] <= 1e-12


def test_profile_position():
    M = weyl_quantize(LinearSymbol([1.0, 0.0]), REP)
    prof = beals_seminorm_estimate(M, REP, QuadraticForm.identity(1), 1)
    assert prof[1] == pytest.approx(1.0, abs=1e-10)


def test_profile_cosine_bound():
    a = np.array([0.6, 0.8])
    A = QuadraticForm.identity(1)
    prof = beals_seminorm_estimate(M_COS, REP, A, 3)
    for m in range(4):
        assert prof[m] <= max(1.0, np.linalg.norm(a)) ** m * cv_bound_factor(A, H)
    assert prof.cumulative(3) == max(prof.constants)


def test_padded_and_compressed_commutators_agree_at_low_degree(rng):
    Vs = list(rng.standard_normal((2, 2)))
    P = padded_commutators(M_COS, REP, Vs)
    C = commutator_chain(M_COS, REP, Vs)
    keep = REP.degree <= REP.N - 2
    assert np.abs(compress(P, REP.with_N(REP.N + 2), REP)[np.ix_(keep, keep)] - C[np.ix_(keep, keep)]).max() <= 1e-12


def test_profile_is_invariant_under_metaplectic_conjugation(rng):
    big = GaussianRep(1, 80, H)
    chi = random_symplectic(1, rng, 0.2)
    U = u_of(chi, big).matrix
    Mb = weyl_quantize(COS, big)
    conj = compress(U.conj().T @ Mb @ U, big, REP)
    A = QuadraticForm.identity(1)
    pool = direction_pool(A, rng, n_random=6)
    p1 = beals_seminorm_estimate(M_COS, REP, A, 2, probes=6, rng=np.random.default_rng(3), pool=pool)
    pool2 = pool @ chi.inverse().matrix.T
    p2 = beals_seminorm_estimate(conj, REP, A.pullback(chi.matrix), 2, probes=6, rng=np.random.default_rng(3),
                                 pool=pool2)
    # the two safe blocks are different compressions of unitarily equivalent operators, so
    # the lower estimates agree only up to truncation noise (about 1e-3 at N = 40, shrinking with N)
    assert np.allclose(p1.constants, p2.constants, rtol=5e-3)


# reconstruction


def test_reconstruct_constant():
    F = reconstruct_symbol(2.5 * np.eye(REP.size), None, REP)
    assert np.allclose(F(PROBES), 2.5, atol=1e-10)


def test_reconstruct_cosine_round_trip():
    F = reconstruct_symbol(M_COS, QuadraticForm.identity(1), REP)
    assert np.abs(F(PROBES) - COS(PROBES)).max() <= 1e-3
    assert heat_check(F, M_COS, REP, PROBES) <= 1e-4


def test_reconstruct_translation_requantizes():
    X0 = np.array([0.4, -0.3])
    M = weyl_translate(X0, REP)
    F = reconstruct_symbol(M, None, REP)
    small = GaussianRep(1, 16, H)
    Mq = weyl_quantize(F, small)
    assert np.linalg.norm(small.safe_block(Mq - compress(M, REP, small)), 2) <= 1e-4


def test_reconstruct_stable_in_truncation():
    big = REP.with_N(REP.N + 10)
    F1 = reconstruct_symbol(M_COS, None, REP)
    F2 = reconstruct_symbol(weyl_quantize(COS, big), None, big)
    assert np.abs(F1(PROBES) - F2(PROBES)).max() <= 1e-4


def test_reconstruct_two_pairs(rng):
    rep = GaussianRep(2, 26, H)
    F = TrigSymbol([0.8], [[0.4, -0.3, 0.2, 0.5]], [0.1])
    R = reconstruct_symbol(weyl_quantize(F, rep), None, rep)
    Z = rng.uniform(-0.3, 0.3, (4, 4))
    assert np.abs(R(Z) - F(Z)).max() <= 1e-3
    terms = R.subset_terms(Z[0])
    assert sum(terms.values()) == pytest.approx(R(Z[0]), abs=1e-12)


def test_reconstruct_rejects_bad_input():
    with pytest.raises(ValueError):
        reconstruct_symbol(np.eye(3), None, REP)
    rep3 = GaussianRep(3, 2, H)
    with pytest.raises(ValueError):
        reconstruct_symbol(np.eye(rep3.size), None, rep3)


def test_reconstruction_report():
    F = reconstruct_symbol(M_COS, None, REP)
    r = reconstruction_report(F, PROBES)
    assert r.node_spread <= 1e-6
    assert r.heat_residual <= 1e-4
    assert r.ibp_budget == pytest.approx(ibp_budget())


# kernel machinery


def test_integration_by_parts_identity():
    X = np.array([0.2, -0.1])
    for t, tau in [(0.0, 0.0), (0.3, -0.2), (0.6, 0.5)]:
        plain = kernel_s_integral(M_COS, REP, X, (t, tau))
        ibp = kernel_s_integral(M_COS, REP, X, (t, tau), ibp=True)
        assert plain == pytest.approx(ibp / ((1 + t * t / H) * (1 + tau * tau / H)), abs=1e-10)


def test_regularized_route_matches_moment_route():
    X = np.array([0.2, -0.1])
    F = reconstruct_symbol(M_COS, None, REP)
    assert regularized_g(M_COS, REP, X) == pytest.approx(F.g_values(X)[(0,)], abs=1e-4)


def test_heat_kernel_closed_form(rng):
    Q, c = heat_kernel_form(H)
    for _ in range(5):
        S, T = rng.standard_normal((2, 2)) * 0.5
        z = np.array([S[0], S[1], T[0], T[1]])
        assert c * np.exp(-z @ Q @ z) == pytest.approx(heat_kernel_explicit(S, T, H), rel=1e-10)


@given(st.integers(0, 1000))
def test_complex_cholesky(seed):
    r = np.random.default_rng(seed)
    B = r.standard_normal((3, 3))
    C = r.standard_normal((3, 3))
    Q = B @ B.T + np.eye(3) + 1j * (C + C.T) * 0.3
    L = complex_cholesky(Q)
    assert np.abs(L @ L.T - Q).max() <= 1e-10


def test_bound_factor_and_empirical_K():
    A = QuadraticForm.diagonal([1.0, 0.5])
    assert reconstruction_bound_factor(A, H, 0.0) == 1.0
    K = empirical_K(3.0, A, H)
    assert reconstruction_bound_factor(A, H, K) == pytest.approx(3.0, rel=1e-9)
    assert empirical_K(0.5, A, H) == 0.0


# composition


def test_product_matrix_keeps_intermediate_states():
    G = TrigSymbol([0.5], [[-0.3, 0.9]])
    P = product_matrix(COS, G, REP)
    naive = M_COS @ weyl_quantize(G, REP)
    low = REP.degree <= 10
    assert np.abs((P - naive)[np.ix_(low, low)]).max() <= 1e-12
    # the naive product is wrong near the truncation edge
    assert np.abs(P - naive).max() > 1e-6


def test_compose_with_one():
    one = ConstantSymbol(1.0, 1)
    K = compose_symbols(COS, one, QuadraticForm.identity(1), REP)
    assert np.abs(K(PROBES) - COS(PROBES)).max() <= 1e-3


def test_compose_cosine_square_round_trip():
    K = compose_symbols(COS, COS, None, REP)
    small = GaussianRep(1, 16, H)
    P = product_matrix(COS, COS, REP)
    assert np.linalg.norm(small.safe_block(weyl_quantize(K, small) - compress(P, REP, small)), 2) <= 1e-3


def test_compose_linear_round_trip():
    F, G = LinearSymbol([0.5, 0.2]), LinearSymbol([-0.3, 0.7])
    K = compose_symbols(F, G, None, REP)
    small = GaussianRep(1, 12, H)
    P = product_matrix(F, G, REP)
    assert np.linalg.norm(small.safe_block(weyl_quantize(K, small, n_nodes=40) - compress(P, REP, small)), 2) <= 1e-4


def test_composition_profile_bound(rng):
    A = QuadraticForm.identity(1)
    G = TrigSymbol([0.5], [[-0.3, 0.9]])
    MG = weyl_quantize(G, REP)
    pool = direction_pool(A, rng, n_random=8)
    pF = beals_seminorm_estimate(M_COS, REP, A, 2, probes=8, pool=pool)
    pG = beals_seminorm_estimate(MG, REP, A, 2, probes=8, pool=pool)
    pP = beals_seminorm_estimate(product_matrix(COS, G, REP), REP, A.scaled(4.0), 2, probes=8, pool=pool / 2)
    assert pP.cumulative(2) <= pF.cumulative(2) * pG.cumulative(2) * 1.05
