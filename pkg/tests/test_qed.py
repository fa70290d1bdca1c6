import numpy as np
import pytest
from scipy import linalg

from gaussweyl.phase_space import fundamental_matrix
from gaussweyl.qed import (
    PAULI,
    DimensionCeilingError,
    ModeSet,
    SpinRegister,
    commutator_bound_check,
    cutoff_profile,
    field_symbol,
    free_flow,
    hamiltonian,
    helicity,
    helicity_vector,
    observable_evolution,
    qt_form,
    qt_riemann,
    reduced_beals_profile,
)

K1 = (0.6, 0.3, 0.8)
MODES = ModeSet(np.array([K1]), np.array([1.0]))
REG = SpinRegister(np.zeros((1, 3)), np.array([0.3, -0.2, 0.5]))
H = 0.5


@pytest.fixture(scope="module")
def system():
    return hamiltonian(REG, MODES, 3, H)


def test_modeset_frames():
    modes = ModeSet.shells(3, np.array([[1, 0, 0], [0, 1, 1], [1, -1, 2.0]]))
    for k, (e1, e2) in zip(modes.k, modes.eps):
        assert abs(k @ e1) <= 1e-12 and abs(k @ e2) <= 1e-12
        assert np.allclose([e1 @ e1, e2 @ e2, e1 @ e2], [1, 1, 0], atol=1e-12)
        assert np.cross(e1, e2) @ k > 0
    assert np.all(modes.weights > 0)
    assert modes.d == 2 * modes.n_modes


def test_modeset_validation():
    with pytest.raises(ValueError):
        ModeSet(np.zeros((1, 3)), np.ones(1))
    with pytest.raises(ValueError):
        ModeSet(np.ones((1, 3)), -np.ones(1))
    with pytest.raises(ValueError):
        ModeSet(np.ones((2, 3)), np.ones(1))
    with pytest.raises(ValueError):
        cutoff_profile("box")


def test_cutoff_profiles():
    r = np.array([0.1, 0.5, 2.0])
    assert np.allclose(cutoff_profile()(r), np.exp(-r**2))
    assert not cutoff_profile("zero")(r).any()
    assert np.allclose(cutoff_profile(infrared=0.3)(r), [0.0, np.exp(-0.25), np.exp(-4.0)])


def test_field_parallel_mode_vanishes():
    modes = ModeSet(np.array([[0.0, 0.0, 1.3]]), np.ones(1))
    assert np.abs(field_symbol(3, [0.1, 0.2, 0.3], 0.4, modes).coeffs).max() <= 1e-15
    with pytest.raises(ValueError):
        field_symbol(4, np.zeros(3), 0.0, modes)


def test_field_modulus_independent_of_time_and_point(rng):
    ref = np.abs(field_symbol(2, np.zeros(3), 0.0, MODES).coeffs)
    for _ in range(5):
        x, t = rng.standard_normal(3), rng.uniform(-2, 2)
        assert np.allclose(np.abs(field_symbol(2, x, t, MODES).coeffs), ref, atol=1e-15)


def test_field_coefficients_from_formula(rng):
    # independent evaluation of sqrt(w) i chi |k|^{1/2} (2 pi)^{-3/2} e^{i(t|k| - k.x)} (k ^ e_j)/|k| . eps_s
    k = np.array(K1)
    r = np.linalg.norm(k)
    x, t = rng.standard_normal(3), 0.7
    e1, e2 = MODES.eps[0]
    for j in (1, 2, 3):
        ej = np.eye(3)[j - 1]
        v = 1j * np.exp(-r * r) * np.sqrt(r) * (2 * np.pi) ** -1.5 * np.exp(1j * (t * r - k @ x)) * np.cross(k, ej) / r
        assert np.allclose(field_symbol(j, x, t, MODES).coeffs, [v @ e1, v @ e2], atol=1e-15)


def test_helicity_is_cross_product_and_squares_to_minus_one(rng):
    modes = ModeSet.shells(2, rng.standard_normal((3, 3)))
    c = rng.standard_normal(modes.d) + 1j * rng.standard_normal(modes.d)
    Jc = helicity(c, modes).reshape(modes.n_modes, 2)
    for i, (k, (e1, e2)) in enumerate(zip(modes.k, modes.eps)):
        v = c[2 * i] * e1 + c[2 * i + 1] * e2
        w = np.cross(k, v) / np.linalg.norm(k)
        assert np.allclose(Jc[i], [w @ e1, w @ e2], atol=1e-12)
    assert np.allclose(helicity(helicity(c, modes), modes), -c)
    V = rng.standard_normal(2 * modes.d)
    assert np.allclose(helicity_vector(helicity_vector(V, modes), modes), -V)


def test_free_flow():
    assert np.allclose(free_flow(0.0, MODES).matrix, np.eye(4))
    period = 2 * np.pi / np.linalg.norm(K1)
    assert np.abs(free_flow(period, MODES).matrix - np.eye(4)).max() <= 1e-12
    a, b = free_flow(0.3, MODES).matrix, free_flow(0.9, MODES).matrix
    assert np.abs(a @ b - free_flow(1.2, MODES).matrix).max() <= 1e-12
    assert np.abs(a.T @ a - np.eye(4)).max() <= 1e-12
    # the oscillator symbol of H_ph is invariant
    W = np.diag(np.tile(MODES.omega, 2))
    assert np.abs(a.T @ W @ a - W).max() <= 1e-12


def test_free_evolution_moves_field_symbols(system):
    t = 0.8
    B0 = system.field_operator(field_symbol(1, np.zeros(3), 0.0, MODES))
    ph = np.exp(1j * t * np.real(np.diag(system.H_ph)) / H)
    moved = ph[:, None] * B0 * ph.conj()[None, :]
    Bt = system.field_operator(field_symbol(1, np.zeros(3), t, MODES))
    assert np.abs(moved - Bt).max() <= 1e-12


def test_qt_form():
    assert not qt_form(0.0, REG, MODES).matrix.any()
    Q = qt_form(0.9, REG, MODES)
    assert np.linalg.eigvalsh(Q.matrix).min() >= -1e-12
    assert np.abs(Q.matrix - qt_riemann(0.9, REG, MODES)).max() <= 1e-6
    Qn = qt_form(-0.6, REG, MODES)
    assert np.linalg.eigvalsh(Qn.matrix).min() >= -1e-12
    assert np.abs(Qn.matrix - qt_riemann(-0.6, REG, MODES)).max() <= 1e-6


def test_qt_nonnegative_on_random_vectors(rng):
    Q = qt_form(0.5, REG, MODES)
    assert min(Q(v) for v in rng.standard_normal((100, 4))) >= 0


def test_qt_gram_monotone():
    G1, G2 = qt_form(0.4, REG, MODES).gram, qt_form(0.9, REG, MODES).gram
    assert np.linalg.eigvalsh(G2 - G1).min() >= -1e-12


def test_pauli_algebra():
    s1, s2, s3 = PAULI
    assert np.allclose(s1 @ s2, 1j * s3)
    assert np.allclose(s2 @ s3, 1j * s1)
    assert np.allclose(s3 @ s1, 1j * s2)
    for s in PAULI:
        assert np.allclose(s @ s, np.eye(2))


def test_hamiltonian_hermitian(system):
    assert system.hermiticity_defect() <= 1e-12
    assert system.dim == 16 * 2


def test_hamiltonian_ceiling():
    with pytest.raises(DimensionCeilingError):
        hamiltonian(REG, MODES, 3, H, ceiling=16)


def test_zero_coupling_spectrum():
    modes = ModeSet(np.array([K1]), np.array([1.0]), cutoff="zero")
    reg = SpinRegister(np.array([[0, 0, 0], [0.4, -0.2, 0.1]]), np.array([0.3, -0.2, 0.5]))
    sys0 = hamiltonian(reg, modes, 2, H)
    vac = np.repeat(sys0.rep.degree == 0, 4)
    ev = np.linalg.eigvalsh(sys0.H[np.ix_(vac, vac)])
    b = H * np.linalg.norm(reg.beta)
    assert np.allclose(ev, [-2 * b, 0, 0, 2 * b], atol=1e-12)


def test_reduced_propagator(system):
    assert np.allclose(system.reduced_propagator(0.0), np.eye(system.dim), atol=1e-12)
    U = system.reduced_propagator(0.7)
    assert np.abs(U.conj().T @ U - np.eye(system.dim)).max() <= 1e-10
    assert system.derivative_residual(0.7) <= 1e-6


def test_reduced_propagator_zero_coupling():
    modes = ModeSet(np.array([K1]), np.array([1.0]), cutoff="zero")
    sys0 = hamiltonian(REG, modes, 3, H)
    t = 0.9
    spin = sum(b * s for b, s in zip(REG.beta, PAULI))
    ref = np.kron(np.eye(sys0.dim_ph), linalg.expm(-1j * t * spin))
    assert np.abs(sys0.reduced_propagator(t) - ref).max() <= 1e-10


def test_reduced_beals_profile(system):
    t = 0.9
    prof = reduced_beals_profile(system, t, qt_form(t, REG, MODES))
    assert prof and max(prof) <= 1.05


def test_observables_at_time_zero(system):
    S = observable_evolution("spin", 0.0, system, j=2)
    assert np.allclose(S.operator, system.spin(2, 1))
    for kind in ("magnetic", "electric"):
        r = observable_evolution(kind, 0.0, system, j=1, Qt=qt_form(0.0, REG, MODES))
        assert np.abs(r.operator).max() <= 1e-12


def test_spin_norm_is_one(system):
    for j in (1, 2, 3):
        r = observable_evolution("spin", 0.6, system, j=j)
        assert abs(r.measured - 1.0) <= 1e-10


def test_fields_with_zero_coupling_evolve_freely():
    modes = ModeSet(np.array([K1]), np.array([1.0]), cutoff="zero")
    sys0 = hamiltonian(REG, modes, 3, H)
    for kind in ("magnetic", "electric"):
        r = observable_evolution(kind, 0.8, sys0, j=2)
        assert r.extras["full_norm"] <= 1e-10


@pytest.mark.parametrize("kind", ["magnetic", "electric"])
def test_field_difference_within_bound(system, kind):
    for t in (0.4, -0.6):
        Qt = qt_form(t, REG, MODES)
        for j in (1, 2, 3):
            r = observable_evolution(kind, t, system, j=j, Qt=Qt)
            assert r.measured <= r.bound * 1.05


def test_photon_number_identity(system):
    t = 0.5
    r = observable_evolution("photon_number", t, system)
    assert r.residual <= 1e-6
    assert r.measured <= r.bound * 1.05
    # oracle: dN/dt = i e^{itH/h} [H_int, N] e^{-itH/h}
    Nop = system.photon_number()
    U = system.evolution(t)
    direct = 1j * U.conj().T @ (system.H_int @ Nop - Nop @ system.H_int) @ U
    assert np.linalg.norm(r.operator - direct, 2) <= 1e-6


def test_commutator_bound(system, rng):
    for t in (0.4, 0.9):
        worst = 0.0
        for V in rng.standard_normal((50, 4)):
            lhs, rhs = commutator_bound_check(system, V, t)
            worst = max(worst, lhs / rhs)
        assert worst <= 1.05


def test_unknown_observable(system):
    with pytest.raises(ValueError):
        observable_evolution("charge", 0.1, system)
