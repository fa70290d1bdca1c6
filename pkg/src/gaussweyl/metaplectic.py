"""Metaplectic operators: rotations, shears, dilations and their composition.

Convention: U_chi^* Op(F) U_chi = Op(F o chi). Every symplectic chi factors
as chi_1 . shear(S) . dilate(T) with chi_1 orthogonal and commuting with F,
shear(S)(x, xi) = (x, xi + S x) and dilate(T)(x, xi) = (T x, T^{-1} xi).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import linalg, sparse
from scipy.sparse import linalg as sparse_linalg

from .gaussian_rep import GaussianRep, gauss_hermite, tensor_rule
from .phase_space import SymplecticMap, fundamental_matrix


def shear_map(S: np.ndarray) -> SymplecticMap:
    S = np.atleast_2d(np.asarray(S, dtype=float))
    d = S.shape[0]
    return SymplecticMap(np.block([[np.eye(d), np.zeros((d, d))], [S, np.eye(d)]]))


def dilation_map(T: np.ndarray) -> SymplecticMap:
    T = np.atleast_2d(np.asarray(T, dtype=float))
    d = T.shape[0]
    return SymplecticMap(np.block([[T, np.zeros((d, d))], [np.zeros((d, d)), np.linalg.inv(T)]]))


def rotation_map(W: np.ndarray) -> SymplecticMap:
    """The real form of x + i xi -> W (x + i xi) for unitary W."""
    W = np.atleast_2d(np.asarray(W, dtype=complex))
    R, S = W.real, W.imag
    return SymplecticMap(np.block([[R, -S], [S, R]]))


def plane_rotation(d: int, angles) -> SymplecticMap:
    return rotation_map(np.diag(np.exp(1j * np.broadcast_to(np.asarray(angles, dtype=float), (d,)))))


@dataclass(frozen=True)
class MetaplecticFactorization:
    chi1: SymplecticMap
    S: np.ndarray
    T: np.ndarray

    @property
    def W(self) -> np.ndarray:
        d = self.chi1.d
        m = self.chi1.matrix
        return m[:d, :d] + 1j * m[d:, :d]

    def compose(self) -> np.ndarray:
        return self.chi1.matrix @ shear_map(self.S).matrix @ dilation_map(self.T).matrix


def factorize(chi: SymplecticMap) -> MetaplecticFactorization:
    """chi = chi_1 . shear(S) . dilate(T) with T positive definite."""
    if not isinstance(chi, SymplecticMap):
        chi = SymplecticMap(np.asarray(chi, dtype=float))
    d = chi.d
    B = chi.matrix[:, d:]
    # orthonormal frame of the Lagrangian image of the xi-plane
    G = B.T @ B
    w, v = np.linalg.eigh(G)
    U = B @ (v / np.sqrt(w)) @ v.T
    R, S = U[d:], -U[:d]
    phi1 = np.block([[R, -S], [S, R]])
    phi = phi1.T @ chi.matrix
    A, C = phi[:d, :d], phi[d:, :d]
    Up, Sp = linalg.polar(A)
    if np.min(np.linalg.eigvalsh(Sp)) <= 0:
        raise ValueError("polar factor is not positive definite")
    chi1 = phi1 @ np.block([[Up, np.zeros((d, d))], [np.zeros((d, d)), Up]])
    shear = Up.T @ C @ np.linalg.inv(Sp)
    shear = 0.5 * (shear + shear.T)
    Sp = 0.5 * (Sp + Sp.T)
    return MetaplecticFactorization(SymplecticMap(chi1), shear, Sp)


@dataclass(frozen=True)
class MetaplecticOperator:
    """Compressed unitary with the generator data that produced it."""

    matrix: np.ndarray
    rep: GaussianRep
    provenance: tuple = field(default_factory=tuple)

    def __matmul__(self, other: "MetaplecticOperator") -> "MetaplecticOperator":
        return MetaplecticOperator(self.matrix @ other.matrix, self.rep, self.provenance + other.provenance)

    def conjugate(self, M: np.ndarray) -> np.ndarray:
        """U^* M U."""
        return self.matrix.conj().T @ M @ self.matrix

    def unitarity_defect(self, margin: int = 4) -> float:
        U = self.matrix
        E = U.conj().T @ U - np.eye(U.shape[0])
        return float(np.linalg.norm(self.rep.safe_block(E, margin), 2))


def _number_conserving(rep: GaussianRep, K: np.ndarray) -> np.ndarray:
    """sum_jk K_jk c_j^* c_k."""
    out = np.zeros((rep.size, rep.size), dtype=complex)
    for j in range(rep.d):
        cj = rep.creation(j)
        for k in range(rep.d):
            if K[j, k] != 0:
                out += K[j, k] * (cj @ rep.annihilation(k))
    return out


def u_rotation(chi1: SymplecticMap, rep: GaussianRep, tol: float = 1e-10) -> MetaplecticOperator:
    """Second quantization of the unitary W with chi_1 = real form of W.

    On total degree <= N the operator exp(dGamma(log W)) is computed exactly:
    number-conserving operators never leave that sector. Higher total degrees
    (present in the box truncation when d > 1) are left untouched.
    """
    m = chi1.matrix
    d = chi1.d
    if np.abs(m.T @ m - np.eye(2 * d)).max() > tol or np.abs(m @ fundamental_matrix(d) - fundamental_matrix(d) @ m).max() > tol:
        raise ValueError("rotation must be orthogonal and commute with F")
    W = m[:d, :d] + 1j * m[d:, :d]
    K = linalg.logm(W)
    keep = rep.degree <= rep.N
    G = _number_conserving(rep, K)[np.ix_(keep, keep)]
    U = np.eye(rep.size, dtype=complex)
    U[np.ix_(keep, keep)] = linalg.expm(G)
    return MetaplecticOperator(U, rep, (("rotation", W),))


def _exact_nodes(rep: GaussianRep) -> int:
    """Nodes per rotated coordinate: box-truncated products have degree up to d N in each."""
    return rep.d * rep.N + 2


def _complex_gauss_rule(rep: GaussianRep, n: int, scales: np.ndarray, basis: np.ndarray):
    """Nodes x = basis @ y with y_k ~ N(0, (h/2) / scales_k) continued to complex scales."""
    t, w = gauss_hermite(n, 1.0)
    pts, wts = tensor_rule(t, w, rep.d)
    y = pts * (rep.sigma / np.sqrt(scales.astype(complex)))
    return y @ basis.T, wts


def u_shear(S: np.ndarray, rep: GaussianRep, n_nodes: int | None = None) -> MetaplecticOperator:
    """Multiplication by exp(i phi_S(x) / 2h), phi_S(x) = x.Sx - (h/2) tr S."""
    S = np.atleast_2d(np.asarray(S, dtype=float))
    if np.abs(S - S.T).max() > 1e-12:
        raise ValueError("shear matrix must be symmetric")
    lam, O = np.linalg.eigh(S)
    order = np.argsort(-lam, kind="stable")
    lam, O = lam[order], O[:, order]
    O = O * np.where(O[np.argmax(np.abs(O), axis=0), range(len(lam))] < 0, -1.0, 1.0)
    # Gaussian weight times the multiplier is a Gaussian with complex precision 1 - i lam/2
    c = 1 - 0.5j * lam
    n = _exact_nodes(rep) if n_nodes is None else n_nodes
    X, w = _complex_gauss_rule(rep, n, c, O)
    E = rep.evaluate_basis(X)
    pref = np.prod(c ** -0.5) * np.exp(-0.25j * np.trace(S))
    U = pref * (E * w[:, None]).T @ E
    return MetaplecticOperator(U, rep, (("shear", S),))


def u_dilate(T: np.ndarray, rep: GaussianRep, n_nodes: int | None = None) -> MetaplecticOperator:
    """(U f)(x) = f(T^{-1} x) rho(x)^{1/2} with rho the Jacobian density making U unitary.

    <U e_j, e_i> = (det C det T)^{-1/2} E[e_i(x) e_j(T^{-1} x)] for x ~ N(0, (h/2) C^{-1}),
    C = (I + T^{-2}) / 2; the integrand is polynomial so the rule is exact.
    """
    T = np.atleast_2d(np.asarray(T, dtype=float))
    if np.abs(T - T.T).max() > 1e-12:
        raise ValueError("dilation matrix must be symmetric")
    tau, O = np.linalg.eigh(T)
    if np.min(tau) <= 0:
        raise ValueError("dilation matrix must be positive definite")
    c = (1 + tau**-2) / 2
    n = _exact_nodes(rep) if n_nodes is None else n_nodes
    X, w = _complex_gauss_rule(rep, n, c, O)
    X = X.real
    Tinv = O @ np.diag(1 / tau) @ O.T
    Ei = rep.evaluate_basis(X)
    Ej = rep.evaluate_basis(X @ Tinv.T)
    pref = (np.prod(c) * np.prod(tau)) ** -0.5
    U = pref * (Ei * w[:, None]).T @ Ej
    return MetaplecticOperator(U.astype(complex), rep, (("dilation", T),))


def u_of(chi: SymplecticMap, rep: GaussianRep) -> MetaplecticOperator:
    """U_chi up to a unit scalar, as rotation . shear . dilation."""
    fac = factorize(chi)
    return u_rotation(fac.chi1, rep) @ u_shear(fac.S, rep) @ u_dilate(fac.T, rep)


def _chunked_apply(Ea_fn, Eb_fn, w: np.ndarray, V: np.ndarray, chunk: int) -> np.ndarray:
    """sum over nodes of Ea(node)^T w (Eb(node) V), a node block at a time."""
    out = None
    for s in range(0, w.size, chunk):
        sl = slice(s, s + chunk)
        Ea, Eb = Ea_fn(sl), Eb_fn(sl)
        part = Ea.T @ (w[sl, None] * (Eb @ V))
        out = part if out is None else out + part
    return out


def apply_shear(S: np.ndarray, rep: GaussianRep, V: np.ndarray, chunk: int = 2048) -> np.ndarray:
    """u_shear(S, rep).matrix @ V without forming the matrix."""
    S = np.atleast_2d(np.asarray(S, dtype=float))
    lam, O = np.linalg.eigh(0.5 * (S + S.T))
    c = 1 - 0.5j * lam
    X, w = _complex_gauss_rule(rep, _exact_nodes(rep), c, O)
    pref = np.prod(c ** -0.5) * np.exp(-0.25j * np.trace(S))
    E = lambda sl: rep.evaluate_basis(X[sl])
    return pref * _chunked_apply(E, E, w, np.asarray(V, dtype=complex), chunk)


def apply_dilation(T: np.ndarray, rep: GaussianRep, V: np.ndarray, chunk: int = 2048) -> np.ndarray:
    """u_dilate(T, rep).matrix @ V without forming the matrix."""
    T = np.atleast_2d(np.asarray(T, dtype=float))
    tau, O = np.linalg.eigh(0.5 * (T + T.T))
    if np.min(tau) <= 0:
        raise ValueError("dilation matrix must be positive definite")
    c = (1 + tau**-2) / 2
    X, w = _complex_gauss_rule(rep, _exact_nodes(rep), c, O)
    X = X.real
    Tinv = O @ np.diag(1 / tau) @ O.T
    pref = (np.prod(c) * np.prod(tau)) ** -0.5
    Ei = lambda sl: rep.evaluate_basis(X[sl])
    Ej = lambda sl: rep.evaluate_basis(X[sl] @ Tinv.T)
    return pref * _chunked_apply(Ei, Ej, w, np.asarray(V, dtype=complex), chunk)


def _sparse_number_conserving(rep: GaussianRep, K: np.ndarray):
    c = sparse.diags(np.sqrt(np.arange(1, rep.N + 1)), 1, format="csr")
    eye = sparse.identity(rep.N + 1, format="csr")

    def embed(op, j):
        out = sparse.identity(1, format="csr")
        for k in range(rep.d):
            out = sparse.kron(out, op if k == j else eye, format="csr")
        return out

    out = sparse.csr_matrix((rep.size, rep.size), dtype=complex)
    for j in range(rep.d):
        for k in range(rep.d):
            if K[j, k] != 0:
                out = out + K[j, k] * (embed(c.T, j) @ embed(c, k))
    return out


def apply_rotation(chi1: SymplecticMap, rep: GaussianRep, V: np.ndarray) -> np.ndarray:
    """u_rotation(chi1, rep).matrix @ V through a sparse generator."""
    d = chi1.d
    m = chi1.matrix
    K = linalg.logm(m[:d, :d] + 1j * m[d:, :d])
    keep = rep.degree <= rep.N
    G = _sparse_number_conserving(rep, K)[keep][:, keep]
    out = np.array(V, dtype=complex)
    out[keep] = sparse_linalg.expm_multiply(G, out[keep])
    return out


def u_apply(chi: SymplecticMap, rep: GaussianRep, V: np.ndarray) -> np.ndarray:
    """u_of(chi, rep).matrix @ V, generator by generator; for a few columns at large N."""
    fac = factorize(chi)
    W = apply_shear(fac.S, rep, apply_dilation(fac.T, rep, V))
    return apply_rotation(fac.chi1, rep, W)


def dilation_density(T: np.ndarray, x: np.ndarray, variance: float) -> np.ndarray:
    """rho_T(x) = dmu(T^{-1} x) / dmu(x) / det T for the centered Gaussian of given variance.

    Satisfies int f(T^{-1} x) rho_T(x) dmu(x) = int f dmu.
    """
    T = np.atleast_2d(np.asarray(T, dtype=float))
    x = np.asarray(x, dtype=float)
    y = x @ np.linalg.inv(T).T
    return np.exp(-(np.sum(y**2, axis=-1) - np.sum(x**2, axis=-1)) / (2 * variance)) / np.linalg.det(T)


def projective_scalar(U: np.ndarray, V: np.ndarray, rep: GaussianRep, margin: int = 4) -> tuple[complex, float]:
    """Best scalar c with U ~ c V on the safe subblock and the residual after removing it."""
    a = rep.safe_block(U, margin)
    b = rep.safe_block(V, margin)
    c = complex(np.vdot(b, a) / np.vdot(b, b))
    return c, float(np.linalg.norm(a - c * b, 2))
