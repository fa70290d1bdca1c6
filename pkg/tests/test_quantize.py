import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import linalg

from gaussweyl.gaussian_rep import GaussianRep, TruncationError
from gaussweyl.phase_space import QuadraticForm, cv_bound_factor, symplectic_form
from gaussweyl.quantize import (
    anti_wick,
    derivative_symbol,
    displacement,
    exp_quantize,
    heat_apply,
    projector_symbol,
    translation_symbol,
    weyl_norm,
    weyl_norm_report,
    weyl_quantize,
    weyl_translate,
    wick_symbol,
    wigner,
)
from gaussweyl.symbols import (
    ConstantSymbol,
    ExpSymbol,
    GaussianSymbol,
    LinearSymbol,
    QuadraticSymbol,
    TrigSymbol,
    symbol_norm,
    trig_seminorm_upper,
)
from oracles import displacement_expm, displacement_laguerre, oscillator_levels, weyl_entry_1d


def safe(rep, M, margin=4):
    return rep.safe_block(M, margin)


# displacement and translations


@given(st.floats(-2, 2), st.floats(-2, 2))
def test_displacement_matches_closed_form_and_exponential(re, im):
    beta = complex(re, im)
    D = displacement(beta, 15)
    assert np.abs(D - displacement_laguerre(beta, 15)).max() <= 1e-10
    assert np.abs(D - displacement_expm(beta, 15)).max() <= 1e-10


def test_translate_examples(rng):
    rep = GaussianRep(1, 40, 1.0)
    assert np.allclose(weyl_translate([0.0, 0.0], rep), np.eye(rep.size))
    X = np.array([0.8, -0.6])
    V = weyl_translate(X, rep)
    assert np.abs(V @ rep.vacuum() - rep.coherent(X).coeffs).max() <= 1e-8
    # the product needs intermediate states above N, so form it on a padded basis
    big = rep.with_N(rep.N + 30)
    P = (weyl_translate(X, big) @ weyl_translate(-X, big))[: rep.size, : rep.size]
    assert np.abs(safe(rep, P) - np.eye(safe(rep, P).shape[0])).max() <= 1e-8
    assert weyl_norm(V, rep) == pytest.approx(1.0, abs=1e-8)


def test_translate_composition_law(rng):
    h = 0.5
    rep = GaussianRep(1, 40, h)
    big = rep.with_N(rep.N + 30)
    X, Y = rng.uniform(-0.6, 0.6, (2, 2))
    lhs = (weyl_translate(X, big) @ weyl_translate(Y, big))[: rep.size, : rep.size]
    rhs = np.exp(1j * symplectic_form(X, Y) / (2 * h)) * weyl_translate(X + Y, rep)
    assert np.abs(safe(rep, lhs - rhs)).max() <= 1e-8


def test_translate_refuses_large_shift():
    with pytest.raises(TruncationError):
        weyl_translate([10.0, 0.0], GaussianRep(1, 5, 0.5))


def test_translation_symbol_quantizes_to_translation(rng):
    h = 0.5
    rep = GaussianRep(1, 30, h)
    X = np.array([0.4, 0.3])
    M = weyl_quantize(translation_symbol(X, h), rep, method="quadrature")
    assert np.abs(safe(rep, M - weyl_translate(X, rep))).max() <= 1e-8


# Weyl quantization


def test_quantize_constant_is_identity():
    rep = GaussianRep(2, 6, 0.5)
    M = weyl_quantize(ConstantSymbol(1.0, 2), rep)
    assert np.abs(M - np.eye(rep.size)).max() <= 1e-12


def test_quantize_position_is_ell():
    h = 0.6
    rep = GaussianRep(1, 10, h)
    M = weyl_quantize(LinearSymbol([1.0, 0.0]), rep)
    assert np.abs(M - rep.ell([1.0])).max() <= 1e-12
    assert M[0, 1] == pytest.approx(np.sqrt(h / 2))


def test_quantize_momentum():
    rep = GaussianRep(2, 5, 0.4)
    M = weyl_quantize(LinearSymbol([0.0, 0.0, 0.0, 1.0]), rep)
    assert np.abs(M - rep.momentum(1)).max() <= 1e-12


@pytest.mark.parametrize("h", [0.3, 1.0])
def test_oscillator_spectrum(h):
    N = 30
    rep = GaussianRep(1, N, h)
    M = weyl_quantize(QuadraticSymbol.oscillator(1), rep)
    assert np.abs(M - (2 * h * rep.number() + h * np.eye(rep.size))).max() <= 1e-10
    ev = np.linalg.eigvalsh(M)[: N - 1]
    assert np.abs(ev - oscillator_levels(h, N - 1)).max() <= 1e-8


def test_quantize_real_symbol_is_selfadjoint(rng):
    rep = GaussianRep(2, 8, 0.5)
    M = weyl_quantize(TrigSymbol.random(2, rng), rep, method="quadrature")
    assert np.abs(M - M.conj().T).max() <= 1e-10


def test_exp_route_matches_position_space_kernel():
    h = 0.7
    a = np.array([0.8, -0.5])
    rep = GaussianRep(1, 8, h)
    ref = np.array([[weyl_entry_1d(a, i, j, h) for j in range(5)] for i in range(5)])
    for method in ("auto", "quadrature"):
        M = weyl_quantize(ExpSymbol([1.0], [a]), rep, method=method)
        assert np.abs(M[:5, :5] - ref).max() <= 1e-10


@given(st.integers(0, 10_000))
def test_exact_and_quadrature_routes_agree(seed):
    r = np.random.default_rng(seed)
    rep = GaussianRep(2, 6, float(r.uniform(0.2, 1.0)))
    F = TrigSymbol.random(2, r, max_freq=1.5)
    A = exp_quantize(F, rep)
    B = weyl_quantize(F, rep, method="quadrature")
    assert np.abs(A - B).max() <= 1e-10


def test_quantize_rejects_bad_input():
    rep = GaussianRep(1, 4, 0.5)
    with pytest.raises(ValueError):
        weyl_quantize(ConstantSymbol(1.0, 2), rep)
    with pytest.raises(ValueError):
        weyl_quantize(ConstantSymbol(1.0, 1), rep, method="kernel")


# Segal fields


def test_linear_field_without_momentum_is_ell():
    rep = GaussianRep(2, 5, 0.5)
    a = np.array([0.3, -1.2])
    assert np.abs(rep.linear_field(a, [0.0, 0.0]) - rep.ell(a)).max() == 0.0


def test_segal_field_is_quantized_symplectic_pairing(rng):
    rep = GaussianRep(2, 5, 0.5)
    V = rng.standard_normal(4)
    L = rep.segal_field(V)
    v = np.concatenate([-V[2:], V[:2]])  # sigma(Z, V) = v.Z
    assert np.abs(L - weyl_quantize(LinearSymbol(v), rep)).max() <= 1e-12
    assert np.abs(L - L.conj().T).max() <= 1e-14


def test_segal_field_exponentiates_to_translation():
    h = 1.0
    rep = GaussianRep(1, 40, h)
    X = np.array([0.3, 0.4])
    big = rep.with_N(rep.N + 30)
    E = linalg.expm(-1j * big.segal_field(X) / h)[: rep.size, : rep.size]
    assert np.linalg.norm(safe(rep, E - weyl_translate(X, rep)), 2) <= 1e-7


def test_segal_commutator(rng):
    h = 0.5
    rep = GaussianRep(1, 20, h)
    V, W = rng.standard_normal((2, 2))
    C = rep.segal_field(V) @ rep.segal_field(W) - rep.segal_field(W) @ rep.segal_field(V)
    target = (h / 1j) * symplectic_form(V, W) * np.eye(rep.size)
    assert np.abs(safe(rep, C - target)).max() <= 1e-12


@pytest.mark.parametrize("m", [1, 2])
def test_beals_derivative_law(rng, m):
    h = 0.5
    rep = GaussianRep(1, 40, h)
    F = TrigSymbol([0.7, -0.4], [[0.6, 0.2], [-0.3, 0.9]], [0.1, 1.3])
    Vs = list(rng.standard_normal((m, 2)))
    M = weyl_quantize(F, rep)
    for V in reversed(Vs):
        L = rep.segal_field(V)
        M = L @ M - M @ L
    target = (h / 1j) ** m * weyl_quantize(derivative_symbol(F, Vs), rep)
    assert np.abs(safe(rep, M - target, 6)).max() <= 1e-6


# heat flow, Wick and anti-Wick symbols


def test_heat_examples(rng):
    h = 0.6
    Z = rng.standard_normal((8, 4))
    lin = LinearSymbol(rng.standard_normal(4))
    assert np.allclose(heat_apply(lin, h / 2)(Z), lin(Z), atol=1e-12)
    osc = QuadraticSymbol.oscillator(2)
    assert np.allclose(heat_apply(osc, h / 2)(Z), osc(Z) + 2 * h, atol=1e-12)
    a = np.array([0.5, -1.0, 0.3, 0.8])
    cos = TrigSymbol([1.0], [a])
    assert np.allclose(heat_apply(cos, h / 2)(Z), np.exp(-h * (a @ a) / 4) * np.cos(Z @ a), atol=1e-12)
    with pytest.raises(ValueError):
        heat_apply(cos, -1.0)


def test_heat_semigroup(rng):
    F = GaussianSymbol([0.2, -0.1], 0.8)
    Z = rng.standard_normal((5, 2))
    two = heat_apply(heat_apply(F, 0.1), 0.2)(Z)
    one = heat_apply(F, 0.3)(Z)
    assert np.allclose(two, one, atol=1e-10)


def test_heat_on_subspace_matches_exponential_damping():
    a = np.array([0.5, 1.0])
    F = TrigSymbol([1.0], [a])
    S = np.array([[1.0], [0.0]])
    Z = np.array([[0.3, 0.2]])
    got = heat_apply(F, 0.4, S)(Z)
    assert got == pytest.approx(np.exp(-0.4 * 0.25 / 2) * np.cos(Z @ a), abs=1e-12)
    with pytest.raises(ValueError):
        heat_apply(F, 0.4, np.array([[2.0], [0.0]]))


def test_heat_contraction_bound(rng):
    h = 0.5
    A = QuadraticForm.diagonal([1.0, 0.5, 0.25, 0.125])
    F = TrigSymbol([0.9, 0.4], [[0.5, -0.2, 0.3, 0.1], [0.1, 0.6, -0.4, 0.2]], [0.2, 1.0])
    S = np.eye(4)[:, :2]
    t = h / 2
    Z = rng.standard_normal((50, 4))
    dev = np.abs(heat_apply(F, t, S)(Z) - F(Z)).max()
    bound = np.sqrt(t) * trig_seminorm_upper(F, 1, A) * np.sqrt(np.trace(A.matrix @ S @ S.T))
    assert dev <= bound


def test_wick_examples():
    h = 0.5
    rep = GaussianRep(1, 40, h)
    X = np.array([[0.3, -0.4], [0.0, 0.0], [-0.5, 0.2]])
    assert np.allclose(wick_symbol(np.eye(rep.size), rep)(X), 1.0, atol=1e-12)
    M = weyl_quantize(QuadraticSymbol.oscillator(1), rep)
    assert np.allclose(wick_symbol(M, rep)(X), np.sum(X**2, axis=1) + h, atol=1e-8)
    X0 = np.array([0.2, 0.1])
    psi = rep.coherent(X0).coeffs
    P = np.outer(psi, psi.conj())
    assert np.allclose(wick_symbol(P, rep)(X), np.exp(-np.sum((X - X0) ** 2, axis=1) / (2 * h)), atol=1e-10)


@pytest.mark.parametrize("d", [1, 2])
def test_wick_of_weyl_is_heat(rng, d):
    h = 0.5
    rep = GaussianRep(d, 40 if d == 1 else 24, h)
    for F in (TrigSymbol.random(d, rng), GaussianSymbol(rng.uniform(-0.3, 0.3, 2 * d), 1.0)):
        Z = rng.uniform(-1, 1, (20, 2 * d)) * np.sqrt(h)
        M = weyl_quantize(F, rep, method="quadrature")
        dev = np.abs(wick_symbol(M, rep)(Z) - heat_apply(F, h / 2)(Z)).max()
        assert dev <= 1e-6 * (1 + F.sup_bound())


def test_projector_symbol_quantizes_to_projector():
    h = 0.5
    rep = GaussianRep(1, 40, h)
    X = np.array([0.3, -0.2])
    psi = rep.coherent(X).coeffs
    M = weyl_quantize(projector_symbol(X, h), rep)
    assert np.abs(safe(rep, M - np.outer(psi, psi.conj()))).max() <= 1e-6


def test_anti_wick_examples(rng):
    h = 0.5
    rep = GaussianRep(1, 30, h)
    I = anti_wick(ConstantSymbol(1.0, 1), rep)
    assert np.abs(I - np.eye(rep.size)).max() <= 1e-10
    G = GaussianSymbol([0.2, 0.0], 0.7)
    assert np.linalg.eigvalsh(anti_wick(G, rep)).min() >= -1e-12
    a = np.array([0.9, -0.4])
    cos = TrigSymbol([1.0], [a])
    A = anti_wick(cos, rep)
    W = weyl_quantize(cos.heat_exact(h / 2), rep)
    assert np.abs(safe(rep, A - W)).max() <= 1e-6


# Wigner functions


def test_wigner_of_coherent_state(rng):
    h = 0.5
    rep = GaussianRep(1, 40, h)
    X = np.array([0.3, 0.2])
    psi = rep.coherent(X).coeffs
    Z = rng.uniform(-0.5, 0.5, (10, 2))
    got = wigner(psi, psi, rep)(Z)
    assert np.allclose(got, np.exp((-X @ X + 2 * Z @ X) / h), atol=1e-8)


def test_wigner_even_function(rng):
    rep = GaussianRep(1, 10, 0.5)
    f = np.zeros(rep.size)
    f[::2] = rng.standard_normal(6)
    assert wigner(f, f, rep)(np.zeros((1, 2)))[0] == pytest.approx(f @ f, abs=1e-12)


def test_wigner_pointwise_bound(rng):
    h = 0.5
    rep = GaussianRep(1, 30, h)
    f, g = rng.standard_normal((2, rep.size)) + 1j * rng.standard_normal((2, rep.size))
    Z = rng.uniform(-1, 1, (100, 2)) * 0.6
    val = np.abs(wigner(f, g, rep)(Z))
    cap = np.exp(np.sum(Z**2, axis=1) / h) * np.linalg.norm(f) * np.linalg.norm(g)
    assert np.all(val <= cap * (1 + 1e-10))


def test_wigner_refuses_far_points():
    rep = GaussianRep(1, 4, 0.5)
    with pytest.raises(TruncationError):
        wigner(rep.vacuum(), rep.vacuum(), rep)(np.array([[5.0, 5.0]]))


# norms


def test_weyl_norm_identity_and_report():
    rep = GaussianRep(1, 10, 0.5)
    assert weyl_norm(np.eye(rep.size), rep) == pytest.approx(1.0)
    r = weyl_norm_report(2 * np.eye(rep.size), rep, margin=3)
    assert r.safe == pytest.approx(2.0) and r.full == pytest.approx(2.0) and r.margin == 3


def test_cv_bound_holds_for_a_cosine():
    h = 0.5
    rep = GaussianRep(1, 40, h)
    A = QuadraticForm.identity(1)
    F = TrigSymbol([1.0], [[0.8, 0.3]])
    measured = weyl_norm(weyl_quantize(F, rep), rep)
    assert measured <= symbol_norm(F, 4, A) * cv_bound_factor(A, h)
