"""Fixed spin-1/2 particles coupled to a truncated transverse field.

Field modes are quadrature nodes k_i in R^3 with weights w_i, each carrying two
polarizations orthogonal to k_i. The coordinate pair r = 2 i + s of the phase
space holds the coefficient of the field along eps_i^(s) on the cell of k_i,
so a transverse field f has complex coordinates c_r = sqrt(w_i) f(k_i).eps_i^(s)
and real coordinates (Re c, Im c) under the identification z = q + i p.

In these coordinates the free flow (q, p) -> (cos q + sin p, -sin q + cos p)
multiplies z by e^{-i t omega}, so its transpose multiplies by e^{+i t omega}.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate, special

from .gaussian_rep import GaussianRep
from .phase_space import QuadraticForm, SymplecticMap, fundamental_matrix, symplectic_spectrum

PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


class DimensionCeilingError(ValueError):
    """The Fock-spin product space would exceed the configured dimension."""


def cutoff_profile(name: str = "gaussian", infrared: float = 0.0) -> Callable[[np.ndarray], np.ndarray]:
    """chi(|k|): "gaussian" is exp(-|k|^2), "zero" switches the coupling off.

    A positive infrared value zeroes chi below that radius.
    """
    if name == "gaussian":
        base = lambda r: np.exp(-np.asarray(r) ** 2)
    elif name == "zero":
        base = lambda r: np.zeros_like(np.asarray(r, dtype=float))
    else:
        raise ValueError(f"unknown cutoff {name!r}")
    if infrared <= 0:
        return base
    return lambda r: np.where(np.asarray(r) < infrared, 0.0, base(r))


def polarization_pair(k: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """eps1, eps2 with (eps1, eps2, k/|k|) a right-handed orthonormal frame."""
    k = np.asarray(k, dtype=float)
    khat = k / np.linalg.norm(k)
    # cross with the axis least aligned with k; ties go to the lowest index
    e = np.zeros(3)
    e[int(np.argmin(np.abs(khat)))] = 1.0
    e1 = np.cross(khat, e)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(khat, e1)
    return e1, e2


@dataclass(frozen=True)
class ModeSet:
    k: np.ndarray
    weights: np.ndarray
    cutoff: str = "gaussian"
    infrared: float = 0.0
    eps: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        k = np.atleast_2d(np.asarray(self.k, dtype=float))
        w = np.atleast_1d(np.asarray(self.weights, dtype=float))
        if k.shape[1] != 3 or len(w) != len(k):
            raise ValueError("modes need 3-vectors and one weight each")
        if np.any(np.linalg.norm(k, axis=1) == 0):
            raise ValueError("k = 0 is not a valid mode")
        if np.any(w <= 0):
            raise ValueError("weights must be positive")
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "eps", np.array([polarization_pair(kk) for kk in k]))

    @classmethod
    def shells(cls, n_radial: int, directions: np.ndarray, k_max: float = 4.0, cutoff: str = "gaussian",
               infrared: float = 0.0) -> "ModeSet":
        """Gauss-Legendre radii on (0, k_max) times an equal-weight angular design."""
        dirs = np.atleast_2d(np.asarray(directions, dtype=float))
        dirs = dirs / np.linalg.norm(dirs, axis=1, keepdims=True)
        r, wr = special.roots_legendre(n_radial)
        r = 0.5 * k_max * (r + 1)
        wr = 0.5 * k_max * wr
        k = (r[:, None, None] * dirs[None]).reshape(-1, 3)
        w = (wr[:, None] * r[:, None] ** 2 * (4 * np.pi / len(dirs)) * np.ones((1, len(dirs)))).ravel()
        return cls(k, w, cutoff, infrared)

    @property
    def n_modes(self) -> int:
        return len(self.k)

    @property
    def d(self) -> int:
        """Coordinate pairs: one per mode and polarization."""
        return 2 * self.n_modes

    @property
    def omega(self) -> np.ndarray:
        """|k| per coordinate pair."""
        return np.repeat(np.linalg.norm(self.k, axis=1), 2)

    def chi(self) -> np.ndarray:
        return cutoff_profile(self.cutoff, self.infrared)(np.linalg.norm(self.k, axis=1))


@dataclass(frozen=True)
class FieldSymbol:
    """A linear form Z -> Z . vector, with the complex coordinates it came from."""

    coeffs: np.ndarray
    label: int
    point: np.ndarray
    t: float = 0.0

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate([self.coeffs.real, self.coeffs.imag])

    def __call__(self, Z) -> np.ndarray:
        return np.asarray(Z) @ self.vector


def _as_coeffs(values: np.ndarray, modes: ModeSet) -> np.ndarray:
    """Project per-mode complex 3-vectors on the polarization pairs."""
    c = np.einsum("ia,isa->is", values, modes.eps.astype(complex))
    return (np.sqrt(modes.weights)[:, None] * c).ravel()


def field_symbol(j: int, x, t: float, modes: ModeSet, electric: bool = False) -> FieldSymbol:
    """Coordinates of i chi(|k|) |k|^{1/2} (2 pi)^{-3/2} e^{i(t|k| - k.x)} (k ^ e_j)/|k|.

    With electric=True the helicity operator is applied afterwards.
    """
    if j not in (1, 2, 3):
        raise ValueError("field component must be 1, 2 or 3")
    x = np.asarray(x, dtype=float)
    k = modes.k
    r = np.linalg.norm(k, axis=1)
    ej = np.zeros(3)
    ej[j - 1] = 1.0
    scal = 1j * modes.chi() * np.sqrt(r) * (2 * np.pi) ** -1.5 * np.exp(1j * (t * r - k @ x))
    vec = np.cross(k, ej) / r[:, None]
    c = _as_coeffs(scal[:, None] * vec, modes)
    if electric:
        c = helicity(c, modes)
    return FieldSymbol(c, j, x, t)


def helicity(coeffs: np.ndarray, modes: ModeSet) -> np.ndarray:
    """k ^ v / |k| in polarization coordinates: (c1, c2) -> (-c2, c1)."""
    c = np.asarray(coeffs).reshape(modes.n_modes, 2)
    return np.stack([-c[:, 1], c[:, 0]], axis=1).ravel()


def helicity_vector(v: np.ndarray, modes: ModeSet) -> np.ndarray:
    """J acting on a real phase vector (q, p)."""
    d = modes.d
    return np.concatenate([helicity(v[:d], modes).real, helicity(v[d:], modes).real])


def free_flow(t: float, modes: ModeSet) -> SymplecticMap:
    d = modes.d
    c = np.diag(np.cos(t * modes.omega))
    s = np.diag(np.sin(t * modes.omega))
    return SymplecticMap(np.block([[c, s], [-s, c]]))


@dataclass(frozen=True)
class SpinRegister:
    positions: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        pos = np.atleast_2d(np.asarray(self.positions, dtype=float))
        if pos.shape[0] < 1 or pos.shape[1] != 3:
            raise ValueError("need at least one particle position in R^3")
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "beta", np.asarray(self.beta, dtype=float).reshape(3))

    @property
    def n(self) -> int:
        return len(self.positions)

    def pauli(self, m: int, lam: int) -> np.ndarray:
        """sigma_m at particle lam (both 1-based) in the 2^N register."""
        ops = [np.eye(2, dtype=complex)] * self.n
        ops[lam - 1] = PAULI[m - 1]
        out = ops[0]
        for o in ops[1:]:
            out = np.kron(out, o)
        return out


@dataclass(frozen=True)
class QtForm:
    t: float
    matrix: np.ndarray
    gram: np.ndarray
    prefactor: float
    quad_error: float

    @property
    def form(self) -> QuadraticForm:
        return QuadraticForm(self.matrix)

    def __call__(self, V) -> float:
        V = np.asarray(V, dtype=float)
        return float(V @ self.matrix @ V)

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix))

    def spectrum(self) -> np.ndarray:
        return symplectic_spectrum(self.matrix)


def _free_vectors(s: float, register: SpinRegister, modes: ModeSet) -> np.ndarray:
    return np.array([field_symbol(m, x, s, modes).vector for x in register.positions for m in (1, 2, 3)])


def qt_form(t: float, register: SpinRegister, modes: ModeSet, tol: float = 1e-8) -> QtForm:
    """A_t = 3N|t| sum_{m, lam} int_0^t v v^T ds, v the vector of the free field at x_lam.

    For negative t the integral over [t, 0] is used, so the form stays nonnegative.
    """
    D = 2 * modes.d
    if t == 0:
        z = np.zeros((D, D))
        return QtForm(0.0, z, z, 0.0, 0.0)

    def integrand(s):
        V = _free_vectors(s, register, modes)
        return (V.T @ V).ravel()

    sgn = 1.0 if t > 0 else -1.0
    val, err = integrate.quad_vec(lambda s: integrand(sgn * s), 0.0, abs(t), epsabs=tol, epsrel=tol)
    if not np.isfinite(err) or err > 10 * tol * max(1.0, np.abs(val).max()):
        raise RuntimeError("time integral of the free-field Gram matrix did not converge")
    G = val.reshape(D, D)
    G = 0.5 * (G + G.T)
    pref = 3 * register.n * abs(t)
    return QtForm(t, pref * G, G, pref, float(err))


def qt_riemann(t: float, register: SpinRegister, modes: ModeSet, steps: int = 10_000) -> np.ndarray:
    """Midpoint Riemann sum of the same integral."""
    s = (np.arange(steps) + 0.5) * (t / steps)
    G = 0.0
    for si in s:
        V = _free_vectors(si, register, modes)
        G = G + V.T @ V
    return 3 * register.n * abs(t) * G * abs(t) / steps


@dataclass
class SpinBoson:
    """H = H_ph (x) I + h H_int on the truncated Fock space times (C^2)^N."""

    register: SpinRegister
    modes: ModeSet
    n_max: int
    h: float
    ceiling: int = 4096

    def __post_init__(self):
        self.rep = GaussianRep(self.modes.d, self.n_max, self.h, tail_ceiling=1.0)
        self.dim_ph = self.rep.size
        self.dim_sp = 2 ** self.register.n
        if self.dim_ph * self.dim_sp > self.ceiling:
            raise DimensionCeilingError(f"dimension {self.dim_ph * self.dim_sp} exceeds {self.ceiling}")
        self._number_ops = [self.rep.number(j) for j in range(self.modes.d)]
        self.H_ph = self.h * sum(w * n for w, n in zip(self.modes.omega, self._number_ops))
        self.H_int = self._interaction()
        raw = np.kron(self.H_ph, np.eye(self.dim_sp)) + self.h * self.H_int
        self._defect = float(np.abs(raw - raw.conj().T).max())
        self.H = 0.5 * (raw + raw.conj().T)
        self._evals, self._evecs = np.linalg.eigh(self.H)
        self._ph_diag = np.real(np.diag(self.H_ph))

    @property
    def dim(self) -> int:
        return self.dim_ph * self.dim_sp

    def field_operator(self, sym: FieldSymbol) -> np.ndarray:
        """Op(Z . v) on the Fock factor."""
        d = self.modes.d
        return self.rep.linear_field(sym.vector[:d], sym.vector[d:])

    def segal(self, V) -> np.ndarray:
        return self.rep.segal_field(np.asarray(V, dtype=float))

    def lift(self, A: np.ndarray) -> np.ndarray:
        """A (x) I."""
        return np.kron(A, np.eye(self.dim_sp))

    def spin(self, m: int, lam: int) -> np.ndarray:
        """I (x) sigma_m^[lam]."""
        return np.kron(np.eye(self.dim_ph), self.register.pauli(m, lam))

    def _interaction(self) -> np.ndarray:
        out = np.zeros((self.dim_ph * self.dim_sp,) * 2, dtype=complex)
        I = np.eye(self.dim_ph)
        for lam, x in enumerate(self.register.positions, start=1):
            for m in (1, 2, 3):
                B = self.field_operator(field_symbol(m, x, 0.0, self.modes))
                out += np.kron(self.register.beta[m - 1] * I + B, self.register.pauli(m, lam))
        return out

    def interaction_free(self, t: float) -> np.ndarray:
        """e^{itH_ph/h} H_int e^{-itH_ph/h}."""
        ph = np.repeat(np.exp(1j * t * self._ph_diag / self.h), self.dim_sp)
        return ph[:, None] * self.H_int * ph.conj()[None, :]

    def evolution(self, t: float) -> np.ndarray:
        """e^{-itH/h}."""
        return (self._evecs * np.exp(-1j * t * self._evals / self.h)) @ self._evecs.conj().T

    def free_phase(self, t: float) -> np.ndarray:
        """Diagonal of e^{itH_ph/h} (x) I."""
        return np.repeat(np.exp(1j * t * self._ph_diag / self.h), self.dim_sp)

    def reduced_propagator(self, t: float) -> np.ndarray:
        return self.free_phase(t)[:, None] * self.evolution(t)

    def heisenberg(self, A: np.ndarray, t: float) -> np.ndarray:
        U = self.evolution(t)
        return U.conj().T @ A @ U

    def safe_mask(self, margin: int = 1) -> np.ndarray:
        """Product states with every mode at most n_max - margin."""
        return np.repeat(np.all(self.rep.indices <= self.n_max - margin, axis=1), self.dim_sp)

    def safe_norm(self, A: np.ndarray, margin: int = 1) -> float:
        keep = self.safe_mask(margin)
        return float(np.linalg.norm(A[np.ix_(keep, keep)], 2))

    def hermiticity_defect(self) -> float:
        """Largest entry of H - H^* as assembled, before symmetrization."""
        return self._defect

    def photon_number(self) -> np.ndarray:
        return self.lift(sum(self._number_ops))

    def derivative_residual(self, t: float, dt: float = 1e-4) -> float:
        """|| dU/dt + i H_int^free(t) U || with a 5-point difference."""
        dU = (-self.reduced_propagator(t + 2 * dt) + 8 * self.reduced_propagator(t + dt)
              - 8 * self.reduced_propagator(t - dt) + self.reduced_propagator(t - 2 * dt)) / (12 * dt)
        return float(np.linalg.norm(dU + 1j * self.interaction_free(t) @ self.reduced_propagator(t), 2))


def hamiltonian(register: SpinRegister, modes: ModeSet, n_max: int, h: float, ceiling: int = 4096) -> SpinBoson:
    return SpinBoson(register, modes, n_max, h, ceiling)


@dataclass(frozen=True)
class ObservableReport:
    kind: str
    t: float
    operator: np.ndarray
    measured: float
    bound: float
    residual: float = 0.0
    extras: dict = field(default_factory=dict)


def _five_point(f, t: float, dt: float) -> np.ndarray:
    return (-f(t + 2 * dt) + 8 * f(t + dt) - 8 * f(t - dt) + f(t - 2 * dt)) / (12 * dt)


def observable_evolution(kind: str, t: float, system: SpinBoson, j: int = 1, lam: int = 1, x=None,
                         dt: float = 1e-4, Qt: QtForm | None = None, margin: int = 1) -> ObservableReport:
    """Heisenberg evolution of a spin, field or photon-number observable with its check.

    spin: measured = ||S_j(t)||, bound = 1.
    magnetic / electric: measured = ||B(t) - B_free(t)||, bound = h Q_t(F B_{jxt})^{1/2}.
    photon_number: residual of dN/dt = sum X S, measured = max ||Y||,
    bound = max h Q_t(B_{m x_lam t})^{1/2}.

    Field differences are measured below the top Fock level (margin), where
    truncated fields keep the canonical commutation relations; the norm on
    the whole truncated space grows like n_max and goes to extras.
    """
    h = system.h
    modes = system.modes
    reg = system.register
    if kind == "spin":
        S = system.heisenberg(system.spin(j, lam), t)
        return ObservableReport(kind, t, S, float(np.linalg.norm(S, 2)), 1.0)
    Qt = qt_form(t, reg, modes) if Qt is None else Qt
    Fm = fundamental_matrix(modes.d)
    if kind in ("magnetic", "electric"):
        x = np.zeros(3) if x is None else np.asarray(x, dtype=float)
        electric = kind == "electric"
        B0 = system.lift(system.field_operator(field_symbol(j, x, 0.0, modes, electric)))
        symt = field_symbol(j, x, t, modes, electric)
        Bfree = system.lift(system.field_operator(symt))
        Bt = system.heisenberg(B0, t)
        diff = Bt - Bfree
        bound = h * np.sqrt(max(Qt(Fm @ symt.vector), 0.0))
        return ObservableReport(kind, t, diff, system.safe_norm(diff, margin), float(bound),
                                extras={"full_norm": float(np.linalg.norm(diff, 2))})
    if kind == "photon_number":
        Nop = system.photon_number()
        dN = _five_point(lambda s: system.heisenberg(Nop, s), t, dt)
        U = system.evolution(t)
        Ured = system.reduced_propagator(t)
        rhs = np.zeros_like(dN)
        worst_y, worst_b, worst_full = 0.0, 0.0, 0.0
        for lam_, xl in enumerate(reg.positions, start=1):
            for m in (1, 2, 3):
                Bm = system.field_operator(field_symbol(m, xl, 0.0, modes))
                comm = Bm @ sum(system._number_ops) - sum(system._number_ops) @ Bm
                X = 1j * (U.conj().T @ system.lift(comm) @ U)
                S = system.heisenberg(system.spin(m, lam_), t)
                rhs = rhs + X @ S
                # the generator moved by the free flow is B at time t
                Vt = field_symbol(m, xl, t, modes).vector
                Y = X + system.lift(system.segal(Vt))
                worst_y = max(worst_y, system.safe_norm(Y, margin))
                worst_full = max(worst_full, float(np.linalg.norm(Y, 2)))
                worst_b = max(worst_b, float(h * np.sqrt(max(Qt(Vt), 0.0))))
                if not np.allclose(Ured.conj().T @ system.lift(system.segal(Vt)) @ Ured, -X, atol=1e-8):
                    raise RuntimeError("photon-number generator does not match the moved Segal field")
        res = float(np.linalg.norm(dN - rhs, 2))
        return ObservableReport(kind, t, dN, worst_y, worst_b, res, extras={"full_norm": worst_full})
    raise ValueError(f"unknown observable {kind!r}")


def commutator_bound_check(system: SpinBoson, V: np.ndarray, t: float, margin: int = 1) -> tuple[float, float]:
    """(||[L_h(V) (x) I, H_int^free(t)]|| on levels < n_max, h N_t(V)).

    Truncated linear fields satisfy the canonical relations except on the top
    level of each mode, so the commutator is compared on the block that keeps
    every mode below n_max + 1 - margin.
    """
    L = system.lift(system.segal(V))
    Hf = system.interaction_free(t)
    C = L @ Hf - Hf @ L
    blk = C[np.ix_(system.safe_mask(margin), system.safe_mask(margin))]
    Nt = sum(abs(V @ field_symbol(m, x, t, system.modes).vector)
             for x in system.register.positions for m in (1, 2, 3))
    return float(np.linalg.norm(blk, 2)), float(system.h * Nt)


def reduced_beals_profile(system: SpinBoson, t: float, Qt: QtForm, n_dirs: int = 4,
                          margin: int = 1) -> list[float]:
    """||ad(L V) U_red|| / (h Q_t(V)^{1/2}) for the top Q_t eigendirections, on levels < n_max."""
    U = system.reduced_propagator(t)
    w, v = np.linalg.eigh(Qt.matrix)
    order = np.argsort(-w)[:n_dirs]
    keep = system.safe_mask(margin)
    out = []
    for i in order:
        if w[i] <= 1e-14:
            continue
        V = v[:, i]
        L = system.lift(system.segal(V))
        C = (L @ U - U @ L)[np.ix_(keep, keep)]
        out.append(float(np.linalg.norm(C, 2) / (system.h * np.sqrt(w[i]))))
    return out
