"""Linear algebra on the phase space R^{2d}.

Coordinates are ordered Z = (x_1..x_d, xi_1..xi_d). The symplectic form is
sigma(X, Y) = y.xi - x.eta = <X, F Y> with F(x, xi) = (-xi, x).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import schur


def fundamental_matrix(d: int) -> np.ndarray:
    """The matrix F with F(x, xi) = (-xi, x)."""
    eye = np.eye(d)
    zero = np.zeros((d, d))
    return np.block([[zero, -eye], [eye, zero]])


@dataclass(frozen=True)
class PhaseVector:
    x: np.ndarray
    xi: np.ndarray

    def __post_init__(self):
        x = np.atleast_1d(np.asarray(self.x, dtype=float))
        xi = np.atleast_1d(np.asarray(self.xi, dtype=float))
        if x.shape != xi.shape or x.ndim != 1:
            raise ValueError("x and xi must be vectors of equal length")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "xi", xi)

    @property
    def d(self) -> int:
        return self.x.size

    @classmethod
    def from_array(cls, z) -> "PhaseVector":
        z = np.asarray(z, dtype=float)
        if z.ndim != 1 or z.size % 2:
            raise ValueError("phase vector must have even length")
        d = z.size // 2
        return cls(z[:d], z[d:])

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.x, self.xi])


def as_phase_array(X) -> np.ndarray:
    if isinstance(X, PhaseVector):
        return X.as_array()
    z = np.asarray(X, dtype=float)
    if z.shape[-1] % 2:
        raise ValueError("phase vector must have even length")
    return z


def symplectic_form(X, Y) -> float | np.ndarray:
    """sigma(X, Y) = y.xi - x.eta; broadcasts over leading axes."""
    x = as_phase_array(X)
    y = as_phase_array(Y)
    if x.shape[-1] != y.shape[-1]:
        raise ValueError("dimension mismatch")
    d = x.shape[-1] // 2
    val = np.sum(y[..., :d] * x[..., d:], axis=-1) - np.sum(x[..., :d] * y[..., d:], axis=-1)
    return float(val) if np.ndim(val) == 0 else val


@dataclass(frozen=True)
class QuadraticForm:
    """Symmetric nonnegative form Q_A(X) = <AX, X> on R^{2d}."""

    matrix: np.ndarray
    kernel_tol: float = 1e-12
    eigenvalues: np.ndarray = field(init=False, repr=False)
    eigenvectors: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        A = np.array(self.matrix, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] % 2:
            raise ValueError("A must be a square matrix of even size")
        scale = max(np.abs(A).max(), 1e-300)
        if np.abs(A - A.T).max() > 1e-12 * scale:
            raise ValueError("A is not symmetric")
        A = 0.5 * (A + A.T)
        w, v = np.linalg.eigh(A)
        tol = self.kernel_tol * max(np.abs(w).max(initial=0.0), 1e-300)
        if w.size and w.min() < -tol:
            raise ValueError("A is not nonnegative")
        w = np.where(w < tol, 0.0, w)
        A.setflags(write=False)
        object.__setattr__(self, "matrix", A)
        object.__setattr__(self, "eigenvalues", w)
        object.__setattr__(self, "eigenvectors", v)

    @property
    def d(self) -> int:
        return self.matrix.shape[0] // 2

    @classmethod
    def identity(cls, d: int) -> "QuadraticForm":
        return cls(np.eye(2 * d))

    @classmethod
    def diagonal(cls, values) -> "QuadraticForm":
        return cls(np.diag(np.asarray(values, dtype=float)))

    def __call__(self, X) -> float | np.ndarray:
        z = as_phase_array(X)
        val = np.einsum("...i,ij,...j->...", z, self.matrix, z)
        return float(val) if np.ndim(val) == 0 else val

    def q(self, X, Y) -> float:
        return float(as_phase_array(X) @ self.matrix @ as_phase_array(Y))

    def range_basis(self) -> tuple[np.ndarray, np.ndarray]:
        """Orthonormal basis of Ran A and the matching positive eigenvalues."""
        keep = self.eigenvalues > 0
        return self.eigenvectors[:, keep], self.eigenvalues[keep]

    def kernel_basis(self) -> np.ndarray:
        return self.eigenvectors[:, self.eigenvalues == 0]

    def trace(self) -> float:
        return float(self.eigenvalues.sum())

    def pullback(self, chi: np.ndarray) -> "QuadraticForm":
        """The form Q_A o chi, with matrix chi^T A chi."""
        chi = np.asarray(chi, dtype=float)
        return QuadraticForm(chi.T @ self.matrix @ chi, self.kernel_tol)

    def scaled(self, c: float) -> "QuadraticForm":
        return QuadraticForm(c * self.matrix, self.kernel_tol)

    def unit_directions(self) -> np.ndarray:
        """Eigendirections of A scaled to Q_A(U) = 1 (rows)."""
        basis, lam = self.range_basis()
        return (basis / np.sqrt(lam)).T


@dataclass(frozen=True)
class SymplecticNormalForm:
    U: np.ndarray
    V: np.ndarray
    lambdas: np.ndarray
    p: int

    @property
    def d(self) -> int:
        return self.U.shape[1]

    def basis_matrix(self) -> np.ndarray:
        """Symplectic chi sending x_j to V_j and xi_j to U_j.

        sigma(U_j, V_j) = 1 while sigma(x_j, xi_j) = -1, hence the swap.
        """
        return np.hstack([self.V, self.U])


@dataclass(frozen=True)
class SymplecticMap:
    matrix: np.ndarray
    sigma_residual: float = field(init=False)
    tol: float = 1e-10

    def __post_init__(self):
        chi = np.array(self.matrix, dtype=float)
        if chi.ndim != 2 or chi.shape[0] != chi.shape[1] or chi.shape[0] % 2:
            raise ValueError("symplectic map must be a square matrix of even size")
        F = fundamental_matrix(chi.shape[0] // 2)
        res = float(np.abs(chi.T @ F @ chi - F).max())
        if res > self.tol * max(1.0, np.abs(chi).max() ** 2):
            raise ValueError(f"matrix is not symplectic (residual {res:.3e})")
        chi.setflags(write=False)
        object.__setattr__(self, "matrix", chi)
        object.__setattr__(self, "sigma_residual", res)

    @property
    def d(self) -> int:
        return self.matrix.shape[0] // 2

    def inverse(self) -> "SymplecticMap":
        F = fundamental_matrix(self.d)
        return SymplecticMap(-F @ self.matrix.T @ F)

    def __matmul__(self, other: "SymplecticMap") -> "SymplecticMap":
        return SymplecticMap(self.matrix @ other.matrix)


def is_symplectic(chi: np.ndarray, tol: float = 1e-10) -> bool:
    chi = np.asarray(chi, dtype=float)
    F = fundamental_matrix(chi.shape[0] // 2)
    return bool(np.abs(chi.T @ F @ chi - F).max() <= tol * max(1.0, np.abs(chi).max() ** 2))


def _range_and_null(M: np.ndarray, tol: float) -> tuple[np.ndarray, np.ndarray]:
    u, s, vt = np.linalg.svd(M)
    r = int(np.sum(s > tol))
    return u[:, :r], vt[r:].T


def _canonical_pairs(basis: np.ndarray, F: np.ndarray) -> tuple[list, list]:
    """Symplectic Gram-Schmidt on a subspace where sigma is nondegenerate."""
    vecs = [basis[:, k].copy() for k in range(basis.shape[1])]
    U, V = [], []
    while vecs:
        u = vecs.pop(0)
        pairing = [u @ F @ w for w in vecs]
        k = int(np.argmax(np.abs(pairing)))
        v = vecs.pop(k) / pairing[k]
        rest = []
        for w in vecs:
            # remove the components along u and v
            w = w - (w @ F @ v) * u + (w @ F @ u) * v
            rest.append(w)
        vecs = rest
        U.append(u)
        V.append(v)
    return U, V


def symplectic_normal_form(A: QuadraticForm) -> SymplecticNormalForm:
    """Symplectic basis adapted to A.

    Pairs carrying a positive value lambda_j come first in the returned
    arrays after the p degenerate pairs (A V_j = 0), matching the ordering
    j <= p < j of the statement, with lambda_j sorted descending.
    """
    d = A.d
    F = fundamental_matrix(d)
    Am = A.matrix
    M = F @ Am
    scale = max(np.abs(Am).max(), 1e-300)
    E, Nsp = _range_and_null(M @ M, 1e-12 * scale**2 * 2 * d)

    U_pos, V_pos, lam_pos = [], [], []
    if E.shape[1]:
        A_E = E.T @ Am @ E
        Om = E.T @ F @ E
        w, o = np.linalg.eigh(0.5 * (A_E + A_E.T))
        isq = o @ np.diag(1 / np.sqrt(w)) @ o.T
        K = isq @ Om @ isq
        # K is antisymmetric, so its real Schur form is made of 2x2 blocks
        T, Z = schur(0.5 * (K - K.T), output="real")
        for k in range(E.shape[1] // 2):
            o1, o2 = Z[:, 2 * k], Z[:, 2 * k + 1]
            mu = T[2 * k, 2 * k + 1]
            if mu < 0:
                o2, mu = -o2, -mu
            U_pos.append(E @ (isq @ o1) / np.sqrt(mu))
            V_pos.append(E @ (isq @ o2) / np.sqrt(mu))
            lam_pos.append(1.0 / mu)

    U_deg, V_deg = [], []
    if Nsp.shape[1]:
        A_N = Nsp.T @ Am @ Nsp
        wN, vN = np.linalg.eigh(0.5 * (A_N + A_N.T))
        ker_local = vN[:, wN <= 1e-10 * scale]
        KN = Nsp @ ker_local
        # radical of sigma restricted to Ker A inside the null part
        OmK = KN.T @ F @ KN
        _, rad_local = _range_and_null(OmK, 1e-10)
        R0 = KN @ rad_local if rad_local.size else np.zeros((2 * d, 0))
        if R0.shape[1]:
            R0, _ = np.linalg.qr(R0)
        # symplectic complement of R0 inside Ker A
        if R0.shape[1] < KN.shape[1]:
            proj = np.eye(2 * d) - R0 @ R0.T
            comp, _ = _range_and_null(proj @ KN, 1e-10)
            Uk, Vk = _canonical_pairs(comp, F)
            U_deg += Uk
            V_deg += Vk
        s = R0.shape[1]
        if s:
            # sigma-orthogonal complement of the kernel pairs within Nsp
            C = Nsp.copy()
            for u, v in zip(U_deg, V_deg):
                C = C - np.outer(u, (C.T @ F @ v)) + np.outer(v, (C.T @ F @ u))
            Cb, _ = _range_and_null(C, 1e-10)
            # complement of R0 inside C
            proj = np.eye(2 * d) - R0 @ R0.T
            Wp, _ = _range_and_null(proj @ Cb, 1e-10)
            Wp = Wp[:, :s]
            G = Wp.T @ F @ R0
            L = Wp @ np.linalg.inv(G).T
            S_ = L.T @ F @ L
            L = L + R0 @ (S_.T / 2)
            Gq = L.T @ Am @ L
            wq, P = np.linalg.eigh(0.5 * (Gq + Gq.T))
            L = L @ P
            Rv = R0 @ P
            # normalize sigma(U, V) = 1
            for k in range(s):
                c = L[:, k] @ F @ Rv[:, k]
                U_deg.append(L[:, k])
                V_deg.append(Rv[:, k] / c)

    order = np.argsort(lam_pos)[::-1]
    U = U_deg + [U_pos[k] for k in order]
    V = V_deg + [V_pos[k] for k in order]
    lambdas = np.array([lam_pos[k] for k in order])
    Um = np.array(U).T.reshape(2 * d, len(U))
    Vm = np.array(V).T.reshape(2 * d, len(V))
    # fix signs deterministically: first nonzero entry of U_j positive
    for j in range(Um.shape[1]):
        nz = np.flatnonzero(np.abs(Um[:, j]) > 1e-12)
        if nz.size and Um[nz[0], j] < 0:
            Um[:, j] *= -1
            Vm[:, j] *= -1
    return SymplecticNormalForm(U=Um, V=Vm, lambdas=lambdas, p=len(U_deg))


def symplectic_spectrum(A: QuadraticForm) -> np.ndarray:
    """Nonzero lambda_j, sorted descending, from the eigenvalues of -(FA)^2."""
    F = fundamental_matrix(A.d)
    M = F @ A.matrix
    ev = np.linalg.eigvals(-(M @ M)).real
    scale = max(np.abs(A.matrix).max(), 1e-300) ** 2
    ev = np.sort(ev[ev > 1e-12 * scale * 2 * A.d])[::-1]
    # each value appears twice
    return np.sqrt(ev[::2])


def _quotient_matrix(A: QuadraticForm, T: np.ndarray) -> np.ndarray:
    W, lam = A.range_basis()
    s = np.sqrt(lam)
    return (s[:, None] * (W.T @ T @ W)) / s[None, :]


def fredholm_det(A: QuadraticForm, z: float, T: np.ndarray, tol: float = 1e-9) -> float:
    """det(I + z|T|_q) on H^2 / Ker A with the scalar product q_A."""
    T = np.asarray(T, dtype=float)
    Tq = _quotient_matrix(A, T)
    if Tq.size == 0:
        return 1.0
    scale = max(np.abs(Tq).max(), 1e-300)
    if np.abs(Tq + Tq.T).max() > tol * scale:
        raise ValueError("T is not skew-symmetric for q_A")
    Tq = 0.5 * (Tq - Tq.T)
    w = np.linalg.eigvalsh(-(Tq @ Tq))
    if w.min() < -tol * scale**2:
        raise ValueError("-T^2 has a negative eigenvalue")
    s = np.sqrt(np.clip(w, 0.0, None))
    return float(np.prod(1.0 + z * s))


def q_singular_values(A: QuadraticForm, T: np.ndarray) -> np.ndarray:
    Tq = _quotient_matrix(A, np.asarray(T, dtype=float))
    if Tq.size == 0:
        return np.zeros(0)
    return np.sort(np.linalg.svd(Tq, compute_uv=False))[::-1]


def fa_norm(A: QuadraticForm) -> float:
    """||FA|| for the q_A norm, equal to max lambda_j."""
    lam = symplectic_normal_form(A).lambdas
    return float(lam.max()) if lam.size else 0.0


def cv_bound_factor(A: QuadraticForm, h: float, c: float = 81 * np.pi) -> float:
    """prod_j (1 + c h S lambda_j) with S = max(1, max lambda_j)."""
    if h <= 0:
        raise ValueError("h must be positive")
    lam = symplectic_normal_form(A).lambdas
    if lam.size == 0:
        return 1.0
    S = max(1.0, float(lam.max()))
    return float(np.prod(1.0 + c * h * S * lam))


def cv_bound_factor_det(A: QuadraticForm, h: float, c: float = 81 * np.pi) -> float:
    """Same factor through the Fredholm determinant, square-rooted."""
    F = fundamental_matrix(A.d)
    S = max(1.0, fa_norm(A))
    return float(np.sqrt(fredholm_det(A, c * h * S, F @ A.matrix)))


def geometric_form(d: int, ratio: float = 0.25, scale: float = 1.0, rng=None) -> QuadraticForm:
    """A = O diag(scale*ratio^k) O^T with O random orthogonal when rng is given."""
    lam = scale * ratio ** np.arange(2 * d)
    if rng is None:
        return QuadraticForm.diagonal(lam)
    q, r = np.linalg.qr(rng.standard_normal((2 * d, 2 * d)))
    q = q * np.sign(np.diag(r))
    return QuadraticForm(q @ np.diag(lam) @ q.T)


def random_symplectic(d: int, rng, scale: float = 0.3) -> SymplecticMap:
    """exp(F S) for a random symmetric S, which is symplectic."""
    from scipy.linalg import expm

    S = rng.standard_normal((2 * d, 2 * d)) * scale
    S = 0.5 * (S + S.T)
    return SymplecticMap(expm(fundamental_matrix(d) @ S))
