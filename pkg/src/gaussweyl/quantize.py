"""Weyl and anti-Wick quantization, Wigner functions, heat flow and Wick symbols.

Matrix elements come from the Wigner pairing: with beta = alpha(-2Z),

    Op(F)[i, j] = int F(Z) (-1)^i Dt_ij(beta) dmu_{h/2}(Z),

where Dt(beta) = e^{|beta|^2/2} D(beta) is the displacement matrix with its
Gaussian factor removed. Dt is polynomial in (beta, conj beta), so for
polynomial symbols the Gauss-Hermite rule is exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import special

from .gaussian_rep import GaussianRep, TruncationError, gauss_hermite, power_vectors, tensor_rule
from .phase_space import PhaseVector, as_phase_array
from .symbols import CallableSymbol, ExpSymbol, QuadraticSymbol, LinearSymbol, ConstantSymbol, Symbol

CHUNK = 1024


def displacement_poly(beta: np.ndarray, N: int) -> np.ndarray:
    """Dt(beta) = e^{|beta|^2/2} D(beta) on span(e_0..e_N); shape beta.shape + (N+1, N+1).

    Along the k-th subdiagonal Dt_{n+k,n} = beta^k l_n^k(|beta|^2) with
    l_n^k = sqrt(n!/(n+k)!) L_n^(k) the normalized Laguerre polynomial, run
    by its forward three-term recurrence. The superdiagonals follow from
    D(beta)^* = D(-beta). The column recurrence from D c^* = (c^* - conj beta) D
    is shorter but loses all accuracy once |beta| is a few units.
    """
    beta = np.asarray(beta, dtype=complex)
    x = np.abs(beta) ** 2
    out = np.zeros(beta.shape + (N + 1, N + 1), dtype=complex)
    pw = power_vectors(beta, N) * np.sqrt(special.factorial(np.arange(N + 1)))
    pwc = power_vectors(-np.conj(beta), N) * np.sqrt(special.factorial(np.arange(N + 1)))
    for k in range(N + 1):
        prev = np.zeros_like(x)
        cur = np.full_like(x, 1.0 / np.sqrt(special.factorial(k)))
        for n in range(N + 1 - k):
            out[..., n + k, n] = pw[..., k] * cur
            if k:
                out[..., n, n + k] = pwc[..., k] * cur
            nxt = ((2 * n + 1 + k - x) * cur - np.sqrt(n * (n + k)) * prev) / np.sqrt((n + 1) * (n + k + 1))
            prev, cur = cur, nxt
    return out


def displacement(beta: np.ndarray, N: int) -> np.ndarray:
    """Compression of D(beta) = exp(beta c^* - conj(beta) c)."""
    beta = np.asarray(beta, dtype=complex)
    return displacement_poly(beta, N) * np.exp(-np.abs(beta) ** 2 / 2)[..., None, None]


@dataclass(frozen=True)
class OperatorMatrix:
    """Matrix over the rep basis, optionally tensored with a spin factor (spin index last)."""

    matrix: np.ndarray
    rep: GaussianRep
    spin_dim: int = 1

    def __post_init__(self):
        n = self.rep.size * self.spin_dim
        if self.matrix.shape != (n, n):
            raise ValueError(f"matrix shape {self.matrix.shape} does not match dimension {n}")
        self.matrix.setflags(write=False)

    def dagger(self) -> "OperatorMatrix":
        return OperatorMatrix(self.matrix.conj().T.copy(), self.rep, self.spin_dim)

    def __matmul__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        return OperatorMatrix(self.matrix @ other.matrix, self.rep, self.spin_dim)


# per-coordinate-pair kernels


def _mode_grid(n_nodes: int, variance: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    t, w = gauss_hermite(n_nodes, variance)
    pts, wts = tensor_rule(t, w, 2)
    return pts[:, 0], pts[:, 1], wts


def _weyl_kernel(x, xi, N, h):
    beta = -2 * (x + 1j * xi) / np.sqrt(2 * h)
    sign = (-1.0) ** np.arange(N + 1)
    return displacement_poly(beta, N) * sign[:, None]


def _antiwick_kernel(x, xi, N, h):
    p = power_vectors((x + 1j * xi) / np.sqrt(2 * h), N)
    return p[:, :, None] * np.conj(p[:, None, :])


def _mode_matrix(f: Callable, N: int, h: float, n_nodes: int, kind: str) -> np.ndarray:
    """int f(x, xi) K(x, xi) dmu over one coordinate pair, chunked over nodes."""
    if kind == "weyl":
        x, xi, w = _mode_grid(n_nodes, h / 2)
        kernel = _weyl_kernel
    else:
        x, xi, w = _mode_grid(n_nodes, h)
        kernel = _antiwick_kernel
    vals = np.broadcast_to(np.asarray(f(x, xi)), x.shape) * w
    out = np.zeros((N + 1, N + 1), dtype=complex)
    for s in range(0, x.size, CHUNK):
        sl = slice(s, s + CHUNK)
        keep = vals[sl] != 0
        if not np.any(keep):
            continue
        K = kernel(x[sl][keep], xi[sl][keep], N, h)
        out += np.tensordot(vals[sl][keep], K, axes=(0, 0))
    return out


def _mode_kernels(N: int, h: float, n_nodes: int, kind: str):
    variance = h / 2 if kind == "weyl" else h
    x, xi, w = _mode_grid(n_nodes, variance)
    kernel = _weyl_kernel if kind == "weyl" else _antiwick_kernel
    return x, xi, w, kernel(x, xi, N, h)


def _generic_matrix(F: Symbol, rep: GaussianRep, n_nodes: int, kind: str) -> np.ndarray:
    """Non-separable symbols: contract the grid one coordinate pair at a time."""
    d, N, h = rep.d, rep.N, rep.h
    x, xi, w, K = _mode_kernels(N, h, n_nodes, kind)
    P = x.size
    if P**d * (N + 1) ** 2 > 5e8:
        raise TruncationError("grid too large for a non-separable symbol; lower N or the node count")
    grids = np.meshgrid(*([np.arange(P)] * d), indexing="ij")
    idx = [g.ravel() for g in grids]
    Z = np.empty((P**d, 2 * d))
    for j in range(d):
        Z[:, j] = x[idx[j]]
        Z[:, d + j] = xi[idx[j]]
    vals = np.asarray(F(Z), dtype=complex).reshape((P,) * d)
    for j in range(d):
        vals = vals * w.reshape((1,) * j + (P,) + (1,) * (d - j - 1))
    # T has shape (P,)*(d-k) + (n,n)*k after contracting k pairs, last pair first
    T = vals
    for j in reversed(range(d)):
        T = np.tensordot(T, K, axes=([j], [0]))
        # axes now: remaining grid axes (j of them), then previously built pairs, then new pair
        k = d - j
        if k > 1:
            order = list(range(j)) + [T.ndim - 2, T.ndim - 1] + list(range(j, T.ndim - 2))
            T = T.transpose(order)
    # T axes: (i0, j0, i1, j1, ...) -> matrix rows (i0, i1, ...), cols (j0, j1, ...)
    perm = [2 * k for k in range(d)] + [2 * k + 1 for k in range(d)]
    return T.transpose(perm).reshape(rep.size, rep.size)


def default_nodes(F: Symbol, N: int) -> int:
    """Gauss-Hermite nodes per coordinate for the declared symbol class."""
    if isinstance(F, (ConstantSymbol, LinearSymbol, QuadraticSymbol)):
        # polynomial of degree <= 2 against a degree <= 2N kernel is integrated exactly
        return N + 3
    if F.kind == "gaussian":
        return 3 * (N + 1) + 4
    if isinstance(F, ExpSymbol):
        # oscillating factors need extra degrees roughly in proportion to |a|^2 h
        return 2 * (N + 1) + 8
    return 2 * (N + 1)


def _quantize(F: Symbol, rep: GaussianRep, n_nodes: int | None, kind: str) -> np.ndarray:
    n = default_nodes(F, rep.N) if n_nodes is None else n_nodes
    terms = F.separable_terms()
    if terms is None:
        return _generic_matrix(F, rep, n, kind)
    out = np.zeros((rep.size, rep.size), dtype=complex)
    cache: dict = {}
    for coef, facs in terms:
        if coef == 0:
            continue
        mats = []
        for f in facs:
            key = id(f)
            if key not in cache:
                cache[key] = (f, _mode_matrix(f, rep.N, rep.h, n, kind))
            mats.append(cache[key][1])
        out += coef * rep.kron_modes(mats)
    return out


def weyl_quantize(F: Symbol, rep: GaussianRep, A=None, n_nodes: int | None = None,
                  method: str = "auto") -> np.ndarray:
    """Compression of Op_h^weyl(F) to the rep.

    method "quadrature" integrates the Wigner pairing; "auto" does the same
    except for exponential sums, where Op(e^{i a.Z}) = V_h(h F a) gives the
    matrix elements in closed form. A is accepted for the bound bookkeeping
    of callers and does not change the matrix.
    """
    if F.d != rep.d:
        raise ValueError("symbol and representation dimensions differ")
    if method not in ("auto", "quadrature"):
        raise ValueError(f"unknown method {method!r}")
    if method == "auto" and isinstance(F, ExpSymbol) and n_nodes is None:
        return exp_quantize(F, rep)
    return _quantize(F, rep, n_nodes, "weyl")


def exp_quantize(F: ExpSymbol, rep: GaussianRep) -> np.ndarray:
    """sum_k c_k V_h(h F a_k) with F(x, xi) = (-xi, x)."""
    d = rep.d
    out = np.zeros((rep.size, rep.size), dtype=complex)
    for c, a in zip(F.coeffs, F.freqs):
        if c == 0:
            continue
        X = rep.h * np.concatenate([-a[d:], a[:d]])
        out += c * weyl_translate(X, rep, check=False)
    return out


def anti_wick(Phi: Symbol, rep: GaussianRep, n_nodes: int | None = None) -> np.ndarray:
    """int Phi(X) |Psi_X><Psi_X| dX / (2 pi h)^d, compressed to the rep."""
    if Phi.d != rep.d:
        raise ValueError("symbol and representation dimensions differ")
    return _quantize(Phi, rep, n_nodes, "antiwick")


def weyl_translate(X, rep: GaussianRep, check: bool = True) -> np.ndarray:
    """V_h(X) = exp(-i L_h(X) / h); per coordinate pair the displacement D(alpha(X))."""
    z = as_phase_array(X)
    if check:
        tail = rep.coherent_tail(z)
        if tail > rep.tail_ceiling:
            raise TruncationError(f"|X| = {np.linalg.norm(z):.3g} too large for N = {rep.N} (tail {tail:.2e})")
    al = np.atleast_1d(rep.alpha(z))
    return rep.kron_modes([displacement(a, rep.N) for a in al])


def _apply_modes(mats: list, v: np.ndarray, N: int) -> np.ndarray:
    """Apply a Kronecker product of per-mode matrices (leading batch axis) to v."""
    d = len(mats)
    T = v.reshape((N + 1,) * d)
    batch = mats[0].shape[0]
    T = np.broadcast_to(T, (batch,) + T.shape).copy()
    for j, M in enumerate(mats):
        T = np.moveaxis(np.einsum("bij,b...j->b...i", M, np.moveaxis(T, j + 1, -1)), -1, j + 1)
    return T.reshape(batch, -1)


def wigner(f: np.ndarray, g: np.ndarray, rep: GaussianRep, max_beta: float | None = None) -> Symbol:
    """Z -> e^{|Z|^2/h} <V_h(-2Z) f, g_check> with g_check the parity reverse."""
    f = np.asarray(f, dtype=complex)
    gc = rep.parity() @ np.asarray(g, dtype=complex)
    limit = np.sqrt(rep.N) if max_beta is None else max_beta

    def fn(Z):
        Z = np.asarray(Z, dtype=float)
        shape = Z.shape[:-1]
        Zf = Z.reshape(-1, 2 * rep.d)
        beta = rep.alpha(-2 * Zf)
        if np.any(np.abs(beta) > limit):
            raise TruncationError("requested |Z| beyond the truncation ceiling")
        mats = [displacement_poly(beta[:, j], rep.N) for j in range(rep.d)]
        vals = _apply_modes(mats, f, rep.N) @ np.conj(gc)
        return vals.reshape(shape)

    return CallableSymbol(fn, rep.d, kind="wigner")


def wick_symbol(M: np.ndarray, rep: GaussianRep, check: bool = True) -> Symbol:
    """X -> <M Psi_X, Psi_X>."""
    M = np.asarray(M)

    def fn(X):
        X = np.asarray(X, dtype=float)
        shape = X.shape[:-1]
        Xf = X.reshape(-1, 2 * rep.d)
        if check:
            worst = max(rep.coherent_tail(x) for x in Xf)
            if worst > rep.tail_ceiling:
                raise TruncationError(f"coherent tail {worst:.2e} above ceiling")
        Psi = rep.coherent_vectors(Xf)
        vals = np.einsum("pi,ij,pj->p", np.conj(Psi), M, Psi)
        return vals.reshape(shape)

    return CallableSymbol(fn, rep.d, kind="wick")


class HeatedSymbol(Symbol):
    """X -> int F(X + Y) dmu_{S,t}(Y) by tensor Gauss-Hermite quadrature on S."""

    def __init__(self, F: Symbol, t: float, frame: np.ndarray | None, n_nodes: int):
        super().__init__(F.d)
        self.F = F
        self.t = t
        self.frame = frame
        self.n_nodes = n_nodes
        self.kind = F.kind

    def _rule(self, k):
        nodes, w = gauss_hermite(self.n_nodes, self.t)
        return tensor_rule(nodes, w, k)

    def __call__(self, X):
        X = np.asarray(X, dtype=float)
        if self.t == 0:
            return self.F(X)
        terms = self.F.separable_terms() if self.frame is None else None
        if terms is not None:
            return self._separable(X, terms)
        frame = np.eye(2 * self.d) if self.frame is None else self.frame
        pts, w = self._rule(frame.shape[1])
        Y = pts @ frame.T
        out = np.empty(X.shape[:-1], dtype=complex)
        Xf = X.reshape(-1, 2 * self.d)
        flat = out.reshape(-1)
        for k, x in enumerate(Xf):
            flat[k] = np.asarray(self.F(x + Y)) @ w
        return out if not self.F.is_real else out.real

    def _separable(self, X, terms):
        d = self.d
        pts, w = self._rule(2)
        total = 0.0
        for coef, facs in terms:
            prod = coef
            for j, f in enumerate(facs):
                xj = X[..., j][..., None] + pts[:, 0]
                xij = X[..., d + j][..., None] + pts[:, 1]
                prod = prod * (np.broadcast_to(np.asarray(f(xj, xij)), xj.shape) @ w)
            total = total + prod
        total = np.asarray(total)
        return total.real if self.F.is_real else total

    def sup_bound(self):
        return self.F.sup_bound()

    @property
    def is_real(self):
        return self.F.is_real


def heat_apply(F: Symbol, t: float, subspace: np.ndarray | None = None, n_nodes: int = 24) -> Symbol:
    """H_{S,t} F; subspace is an orthonormal frame (2d, k) or None for all of R^{2d}."""
    if t < 0:
        raise ValueError("heat time must be nonnegative")
    if subspace is not None:
        subspace = np.asarray(subspace, dtype=float)
        if not np.allclose(subspace.T @ subspace, np.eye(subspace.shape[1]), atol=1e-10):
            raise ValueError("subspace frame must be orthonormal")
    return HeatedSymbol(F, t, subspace, n_nodes)


@dataclass(frozen=True)
class NormReport:
    safe: float
    full: float
    margin: int


def weyl_norm_report(M: np.ndarray, rep: GaussianRep, margin: int = 4) -> NormReport:
    full = float(np.linalg.norm(M, 2))
    block = rep.safe_block(M, margin)
    safe = float(np.linalg.norm(block, 2)) if block.size else 0.0
    return NormReport(safe, full, margin)


def weyl_norm(M: np.ndarray, rep: GaussianRep, margin: int = 4) -> float:
    """Largest singular value on the degree <= N - margin subblock."""
    block = rep.safe_block(M, margin)
    return float(np.linalg.norm(block, 2)) if block.size else 0.0


def projector_symbol(X, h: float):
    """Weyl symbol 2^d e^{-|Z - X|^2/h} of the projection onto Psi_X."""
    from .symbols import GaussianSymbol

    z = as_phase_array(X)
    d = z.size // 2
    return GaussianSymbol(z, h, amp=2.0**d)


def translation_symbol(X, h: float) -> ExpSymbol:
    """Weyl symbol Z -> exp(-i sigma(Z, X)/h) of V_h(X)."""
    z = as_phase_array(X)
    d = z.size // 2
    # sigma(Z, X) = Z^T F X with F = [[0,-I],[I,0]]
    fx = np.concatenate([-z[d:], z[:d]])
    return ExpSymbol([1.0], [-fx / h])


def derivative_symbol(F: Symbol, Us) -> Symbol:
    """Z -> d^m F(Z)(U_1..U_m) as a symbol; closed form for exponential and polynomial classes."""
    Us = [np.asarray(u, dtype=float) for u in Us]
    if isinstance(F, ExpSymbol):
        fac = np.ones(len(F.coeffs), dtype=complex)
        for u in Us:
            fac = fac * (1j * (F.freqs @ u))
        return ExpSymbol(F.coeffs * fac, F.freqs)
    if isinstance(F, QuadraticSymbol):
        if len(Us) == 0:
            return F
        if len(Us) == 1:
            return LinearSymbol(2 * F.M @ Us[0]) + ConstantSymbol(float(F.v @ Us[0]), F.d)
        if len(Us) == 2:
            return ConstantSymbol(float(2 * Us[0] @ F.M @ Us[1]), F.d)
        return ConstantSymbol(0.0, F.d)
    return CallableSymbol(lambda Z: F.derivative(Z, Us), F.d, real=F.is_real)
