"""Wick bisymbols, Beals commutator profiles and symbol reconstruction.

The bisymbol of a compressed operator B is, with a = alpha(X) and
b = conj alpha(Y),

    S(B)(X, Y) = e^{-a.b} sum_ij B_ij b^i a^j / sqrt(i! j!),

an entire function once b is continued off the conjugate of a. Symbol
reconstruction integrates it against the complex Gaussian kernel
K(S, T) = 2 (2 pi h)^{-2} exp(-|S|^2/h - |T|^2/4h - i sigma(S, T)/h) per
coordinate pair, at points a = X + S + T/2, b = X + S - T/2. Every Gaussian
weight here has a positive definite real part, so the integrals are
evaluated with Gauss-Hermite nodes moved onto the complex contour where the
weight becomes exp(-|y|^2).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special

from .gaussian_rep import GaussianRep, TruncationError, gauss_hermite, power_vectors, tensor_rule
from .phase_space import QuadraticForm, as_phase_array
from .symbols import Symbol, direction_pool
from .quantize import heat_apply, weyl_quantize

UNDERFLOW = 60.0


# bisymbol


def _bisymbol_values(B: np.ndarray, a: np.ndarray, b: np.ndarray, rep: GaussianRep) -> np.ndarray:
    """S(B) at complex coordinates a, b of shape (P, d)."""
    pa = [power_vectors(a[:, j], rep.N) for j in range(rep.d)]
    pb = [power_vectors(b[:, j], rep.N) for j in range(rep.d)]
    Pa, Pb = pa[0], pb[0]
    for j in range(1, rep.d):
        Pa = (Pa[:, :, None] * pa[j][:, None, :]).reshape(len(a), -1)
        Pb = (Pb[:, :, None] * pb[j][:, None, :]).reshape(len(b), -1)
    return np.exp(-np.sum(a * b, axis=1)) * np.sum((Pb @ B) * Pa, axis=1)


def _ab(X, Y, rep: GaussianRep) -> tuple[np.ndarray, np.ndarray]:
    """a = alpha(X), b = conj alpha(Y), continued to complex phase points."""
    X = np.asarray(X)
    Y = np.asarray(Y)
    d = rep.d
    s = np.sqrt(2 * rep.h)
    return (X[..., :d] + 1j * X[..., d:]) / s, (Y[..., :d] - 1j * Y[..., d:]) / s


def bisymbol(M: np.ndarray, X, Y, rep: GaussianRep, floor: float = UNDERFLOW) -> complex:
    """<M Psi_X, Psi_Y> / <Psi_X, Psi_Y>."""
    x = as_phase_array(X)
    y = as_phase_array(Y)
    if np.sum((x - y) ** 2) / (4 * rep.h) > floor:
        raise TruncationError("coherent overlap below the underflow floor")
    a, b = _ab(x[None], y[None], rep)
    return complex(_bisymbol_values(np.asarray(M), a, b, rep)[0])


@dataclass(frozen=True)
class BisymbolProbe:
    M: np.ndarray
    rep: GaussianRep

    def __call__(self, X, Y) -> complex:
        return bisymbol(self.M, X, Y, self.rep)

    def diag_derivative(self, X, Y, Vs) -> complex:
        """d^m of V -> S(M)(X + V, Y + V) via S((i/h)^m ad(L V_1) .. ad(L V_m) M)."""
        B = padded_commutators(self.M, self.rep, Vs) * (1j / self.rep.h) ** len(Vs)
        big = self.rep.with_N(self.rep.N + len(Vs))
        return bisymbol(B, X, Y, big)

    def holomorphy_residual(self, X, Y, step: float = 1e-4) -> float:
        """|(d_x + i d_xi) S(X, Y)| relative to |S|, by central differences in each pair."""
        x = as_phase_array(X)
        d = self.rep.d
        worst = 0.0
        base = abs(self(x, Y)) + 1e-300
        for j in range(d):
            ex = np.zeros(2 * d)
            ex[j] = step
            exi = np.zeros(2 * d)
            exi[d + j] = step
            dx = (self(x + ex, Y) - self(x - ex, Y)) / (2 * step)
            dxi = (self(x + exi, Y) - self(x - exi, Y)) / (2 * step)
            worst = max(worst, abs(dx + 1j * dxi) / base)
        return worst


# commutators with Segal fields


def padded_commutators(M: np.ndarray, rep: GaussianRep, Vs) -> np.ndarray:
    """ad(L V_1)..ad(L V_m) of the finite-rank operator M, exactly, on N + m levels."""
    m = len(Vs)
    big = rep.with_N(rep.N + m)
    B = embed_padded(M, rep, big)
    for V in reversed(list(Vs)):
        L = big.segal_field(V)
        B = L @ B - B @ L
    return B


def embed_padded(M: np.ndarray, rep: GaussianRep, big: GaussianRep) -> np.ndarray:
    """Zero-pad a matrix on rep into the larger truncation big."""
    keep = np.all(big.indices <= rep.N, axis=1)
    out = np.zeros((big.size, big.size), dtype=complex)
    out[np.ix_(keep, keep)] = M
    return out


def compress(M: np.ndarray, rep: GaussianRep, small: GaussianRep) -> np.ndarray:
    keep = np.all(rep.indices <= small.N, axis=1)
    return M[np.ix_(keep, keep)]


def commutator_chain(M: np.ndarray, rep: GaussianRep, Vs) -> np.ndarray:
    """ad(L V_1)..ad(L V_m) M with compressed fields; exact on degree <= N - m."""
    B = np.asarray(M, dtype=complex)
    for V in reversed(list(Vs)):
        L = rep.segal_field(V)
        B = L @ B - B @ L
    return B


@dataclass
class BealsProfile:
    constants: tuple
    m_max: int
    tuples_per_order: int
    margin: int
    mode: str
    witnesses: dict = field(default_factory=dict)

    def __getitem__(self, m: int) -> float:
        return self.constants[m]

    def cumulative(self, m: int) -> float:
        """max over orders <= m, the seminorm of the class L_m."""
        return max(self.constants[: m + 1])


def beals_seminorm_estimate(M: np.ndarray, rep: GaussianRep, A: QuadraticForm, m: int, probes: int = 12,
                            rng=None, margin: int | None = None, mode: str = "safe",
                            pool: np.ndarray | None = None) -> BealsProfile:
    """C_k = sup ||ad(L V_1)..ad(L V_k) M|| / h^k over sampled Q_A-unit tuples, k = 0..m.

    mode "safe" takes norms on the degree <= N - margin subblock of compressed
    commutators (a lower estimate for the operator M approximates);
    mode "padded" treats M as the finite-rank operator it is and commutes
    exactly on a padded space.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    margin = m + 4 if margin is None else margin
    if mode == "safe" and m > rep.N - margin + 0 and rep.N - margin < 0:
        raise ValueError("order exceeds the safe-subblock depth")
    if pool is None:
        pool = direction_pool(A, rng, n_random=max(probes, 4))
    consts = []
    witnesses = {}
    for k in range(m + 1):
        if k == 0:
            tuples = [()]
        else:
            idx = set()
            # all-equal tuples of each pool direction, then random mixtures
            for j in range(min(len(pool), probes)):
                idx.add((j,) * k)
            while len(idx) < min(probes * 2, len(pool) ** k):
                idx.add(tuple(sorted(rng.integers(0, len(pool), k))))
            tuples = [tuple(pool[i] for i in t) for t in sorted(idx)]
        best, arg = 0.0, None
        for Vs in tuples:
            if mode == "padded":
                C = padded_commutators(M, rep, Vs)
                val = float(np.linalg.norm(C, 2))
            else:
                C = commutator_chain(M, rep, Vs)
                blk = rep.safe_block(C, margin)
                val = float(np.linalg.norm(blk, 2)) if blk.size else 0.0
            val /= rep.h**k
            if val > best:
                best, arg = val, Vs
        consts.append(best)
        witnesses[k] = arg
    return BealsProfile(tuple(consts), m, len(tuples), margin, mode, witnesses)


# complex Gaussian quadrature


def complex_cholesky(Q: np.ndarray) -> np.ndarray:
    """Q = L L^T for complex symmetric Q with positive definite real part."""
    Q = np.asarray(Q, dtype=complex)
    n = Q.shape[0]
    L = np.zeros_like(Q)
    for j in range(n):
        piv = Q[j, j] - np.sum(L[j, :j] ** 2)
        if piv.real <= 0:
            raise ValueError("real part of the form is not positive definite")
        L[j, j] = np.sqrt(piv)
        for i in range(j + 1, n):
            L[i, j] = (Q[i, j] - np.sum(L[i, :j] * L[j, :j])) / L[j, j]
    return L


@dataclass(frozen=True)
class ComplexGaussRule:
    """int f(z) c exp(-z^T Q z) dz ~ sum_k weights_k f(nodes_k) over R^n."""

    nodes: np.ndarray
    weights: np.ndarray

    @classmethod
    def build(cls, Q: np.ndarray, prefactor: complex, n: int) -> "ComplexGaussRule":
        k = Q.shape[0]
        L = complex_cholesky(Q)
        t, w = special.roots_hermite(n)
        grids = np.meshgrid(*([t] * k), indexing="ij")
        Y = np.stack([g.ravel() for g in grids], axis=-1)
        W = np.prod(np.stack([g.ravel() for g in np.meshgrid(*([w] * k), indexing="ij")], axis=-1), axis=-1)
        Z = np.linalg.solve(L.T, Y.T).T
        return cls(Z, prefactor * W / np.prod(np.diag(L)))


def kernel_form(h: float) -> tuple[np.ndarray, complex]:
    """K(S, T) = c exp(-z^T Q z) with z = (s, sigma, t, tau) and sigma(S, T) = t sigma - s tau."""
    Q = np.diag([1 / h, 1 / h, 1 / (4 * h), 1 / (4 * h)]).astype(complex)
    Q[1, 2] = Q[2, 1] = 0.5j / h
    Q[0, 3] = Q[3, 0] = -0.5j / h
    return Q, 2 * (2 * np.pi * h) ** -2


def heat_kernel_form(h: float) -> tuple[np.ndarray, complex]:
    """H^S_{h/2} K as c' exp(-z^T Q' z), by Gaussian convolution in the S block."""
    Q, c = kernel_form(h)
    P = Q[:2, :2] + np.eye(2) / h
    R = Q[:2, :]
    Qh = Q - R.T @ np.linalg.solve(P, R)
    return Qh, c / (h * np.sqrt(np.linalg.det(P)))


def heat_kernel_explicit(S, T, h: float) -> np.ndarray:
    """The closed form of H^S_{h/2} K in complex notation u.conj(v) = (u1 + i u2)(v1 - i v2)."""
    S = np.asarray(S)
    T = np.asarray(T)
    u = S + T / 2
    v = S - T / 2
    uv = (u[..., 0] + 1j * u[..., 1]) * (v[..., 0] - 1j * v[..., 1])
    return (2 * np.pi * h) ** -2 * np.exp(uv / (2 * h) - (np.sum(u**2, -1) + np.sum(v**2, -1)) / (2 * h))


def kernel_values(S, T, h: float) -> np.ndarray:
    S = np.asarray(S)
    T = np.asarray(T)
    sig = T[..., 0] * S[..., 1] - S[..., 0] * T[..., 1]
    return 2 * (2 * np.pi * h) ** -2 * np.exp(
        -np.sum(S**2, -1) / h - np.sum(T**2, -1) / (4 * h) - 1j * sig / h
    )


# reconstruction


@dataclass(frozen=True)
class ReconstructionConfig:
    """n_nodes Gauss-Hermite nodes per T coordinate; telescoping "exact" uses H_{D_j} G_I = G_{I - j}."""

    n_nodes: int = 10
    telescoping: str = "exact"
    heat_nodes: int = 8


class ReconstructedSymbol(Symbol):
    """F = sum_I T_I G_I with G_I(X) = int E(X, 0, T_I) dN(0, 2h)(T_I).

    Setting S = 0 and T = 2 F Y in the bisymbol gives the Wick symbol continued
    to X + iY, and averaging over Y ~ N(0, h/2) inverts H_{h/2} on the pairs in
    I. This is the kernel integral over (S, T) with the S integral already
    done along the holomorphic directions. Each pair contributes a moment
    matrix R[i, k] = int e^{-ab} b^i a^k / sqrt(i! k!) with a = alpha(X + T/2)
    and b = conj alpha(X - T/2).
    """

    kind = "reconstructed"

    def __init__(self, M: np.ndarray, rep: GaussianRep, config: ReconstructionConfig = ReconstructionConfig()):
        super().__init__(rep.d)
        self.M = np.asarray(M, dtype=complex)
        self.rep = rep
        self.config = config
        t, w = gauss_hermite(config.n_nodes, 2 * rep.h)
        self._T, self._W = tensor_rule(t, w, 2)
        ty, wy = gauss_hermite(config.heat_nodes, rep.h / 2)
        self._Y, self._WY = tensor_rule(ty, wy, 2)
        self._tensor = self.M.reshape((rep.N + 1,) * (2 * rep.d))

    def _moments(self, x: float, xi: float, with_t: bool) -> np.ndarray:
        N, h = self.rep.N, self.rep.h
        s = np.sqrt(2 * h)
        if with_t:
            T, w = self._T, self._W
        else:
            T, w = np.zeros((1, 2)), np.ones(1)
        a = ((x + T[:, 0] / 2) + 1j * (xi + T[:, 1] / 2)) / s
        b = ((x - T[:, 0] / 2) - 1j * (xi - T[:, 1] / 2)) / s
        Pa = power_vectors(a, N)
        Pb = power_vectors(b, N)
        return (Pb * (w * np.exp(-a * b))[:, None]).T @ Pa

    def _heated_moments(self, x: float, xi: float) -> np.ndarray:
        """H_{h/2} applied in X to the pair's G moments, by Gauss-Hermite."""
        out = 0.0
        for (yx, yxi), wy in zip(self._Y, self._WY):
            out = out + wy * self._moments(x + yx, xi + yxi, True)
        return out

    def pair_factors(self, X) -> list:
        """Per pair: (R_diag, R_G, R_HG); R_HG is R_diag under exact telescoping."""
        x = as_phase_array(X)
        d = self.d
        out = []
        for j in range(d):
            diag = self._moments(x[j], x[d + j], False)
            g = self._moments(x[j], x[d + j], True)
            hg = diag if self.config.telescoping == "exact" else self._heated_moments(x[j], x[d + j])
            out.append((diag, g, hg))
        return out

    def _contract(self, mats: list) -> complex:
        T = self._tensor
        d = self.d
        # axes: rows (i_0..i_{d-1}), cols (j_0..j_{d-1}); pair k sits at (0, d - k) after k contractions
        for k, R in enumerate(mats):
            T = np.tensordot(T, R, axes=([0, d - k], [0, 1]))
        return complex(T)

    def subset_terms(self, X) -> dict:
        """T_I G_I(X) for every subset I of the coordinate pairs."""
        fac = self.pair_factors(X)
        out = {}
        for mask in itertools.product((0, 1), repeat=self.d):
            mats = [f[1] - f[2] if m else f[0] for f, m in zip(fac, mask)]
            out[tuple(j for j in range(self.d) if mask[j])] = self._contract(mats)
        return out

    def g_values(self, X) -> dict:
        """G_I(X): inverse heat on the pairs in I, Wick diagonal elsewhere."""
        fac = self.pair_factors(X)
        out = {}
        for mask in itertools.product((0, 1), repeat=self.d):
            mats = [f[1] if m else f[0] for f, m in zip(fac, mask)]
            out[tuple(j for j in range(self.d) if mask[j])] = self._contract(mats)
        return out

    def _value(self, x) -> complex:
        # sum over subsets of tensor products = tensor product of per-pair sums
        fac = self.pair_factors(x)
        return self._contract([f[0] + f[1] - f[2] for f in fac])

    def __call__(self, X):
        X = np.asarray(X, dtype=float)
        flat = X.reshape(-1, 2 * self.d)
        vals = np.array([self._value(x) for x in flat])
        return vals.reshape(X.shape[:-1])


@dataclass(frozen=True)
class ReconstructionReport:
    node_spread: float
    heat_residual: float
    ibp_budget: float


def reconstruction_report(F: ReconstructedSymbol, probes: np.ndarray, heat_nodes: int = 8) -> ReconstructionReport:
    """Quadrature stability (n_nodes vs n_nodes - 2) and the H_{h/2} F = Wick residual on probes."""
    cfg = F.config
    coarse = ReconstructedSymbol(F.M, F.rep, ReconstructionConfig(cfg.n_nodes - 2, cfg.telescoping, cfg.heat_nodes))
    spread = float(np.max(np.abs(F(probes) - coarse(probes))))
    heat = heat_check(F, F.M, F.rep, probes, n_nodes=heat_nodes)
    return ReconstructionReport(spread, heat, ibp_budget() ** F.d)


def reconstruct_symbol(M: np.ndarray, A: QuadraticForm | None, rep: GaussianRep,
                       config: ReconstructionConfig = ReconstructionConfig()) -> ReconstructedSymbol:
    """Symbol F with Op(F) ~ M and H_{h/2} F = wick_symbol(M)."""
    M = np.asarray(M)
    if M.shape != (rep.size, rep.size):
        raise ValueError("operator does not match the representation")
    if rep.d > 2:
        raise ValueError("reconstruction is limited to d <= 2")
    return ReconstructedSymbol(M, rep, config)


# integration by parts in one coordinate pair


IBP_COEFFS = (lambda u: 3 - 4 * u**2, lambda u: 4 * u, lambda u: -np.ones_like(u))


def ibp_transpose(B: np.ndarray, rep: GaussianRep, direction: int) -> list:
    """Coefficient matrices of sqrt(h)^k d^k E along s (direction 0) or sigma (1), k = 0, 1, 2.

    Differentiating the bisymbol along (1, 0) or (0, 1) in both arguments is
    the commutator (i/h) ad(L V); padding keeps the polynomial exact.
    """
    V = np.zeros(2)
    V[direction] = 1.0
    out = [np.asarray(B, dtype=complex)]
    cur = np.asarray(B, dtype=complex)
    cur_rep = rep
    for _ in range(2):
        cur = padded_commutators(cur, cur_rep, [V]) * (1j / rep.h) * np.sqrt(rep.h)
        cur_rep = cur_rep.with_N(cur_rep.N + 1)
        out.append(cur)
    return out


def regularized_g(M: np.ndarray, rep: GaussianRep, X, n_s: int = 12, n_t: int = 4) -> complex:
    """G(X) for d = 1 from the kernel K with the integration-by-parts operator applied.

    G = int K (1 + t^2/h)^{-1} (1 + tau^2/h)^{-1} P_s^T P_sigma^T E dS dT with
    P^T E = sum_k a_k(u) h^{k/2} d^k E. For each real T the S integral runs
    along the complex shift that makes K Gaussian in S; the T integral uses
    Gauss-Hermite nodes for the remaining weight exp(-|T|^2 / 2h).

    Large T pushes the S contour far into the complex domain where a
    truncated bisymbol is inaccurate, so only a few T nodes are usable.
    """
    if rep.d != 1:
        raise ValueError("the regularized route is implemented for one coordinate pair")
    x = as_phase_array(X)
    h = rep.h
    big = rep.with_N(rep.N + 4)
    ds = ibp_transpose(M, rep, 0)
    mixed = []
    for k, Dk in enumerate(ds):
        rk = rep.with_N(rep.N + k)
        dsig = ibp_transpose(Dk, rk, 1)
        mixed.append([embed_padded(Dkl, rk.with_N(rk.N + l), big) for l, Dkl in enumerate(dsig)])
    tt, wt = gauss_hermite(n_t, h)
    us, wu = special.roots_hermite(n_s)
    U, V = np.meshgrid(us, us, indexing="ij")
    U, V = U.ravel(), V.ravel()
    wS = np.outer(wu, wu).ravel() * h
    s2 = np.sqrt(2 * h)
    total = 0.0 + 0.0j
    for t, w1 in zip(tt, wt):
        for tau, w2 in zip(tt, wt):
            # K = c exp(-((s - i tau/2)^2 + (sigma + i t/2)^2)/h - |T|^2 / 2h)
            s = 1j * tau / 2 + U * np.sqrt(h)
            sig = -1j * t / 2 + V * np.sqrt(h)
            a = (((x[0] + s + t / 2) + 1j * (x[1] + sig + tau / 2)) / s2)[:, None]
            b = (((x[0] + s - t / 2) - 1j * (x[1] + sig - tau / 2)) / s2)[:, None]
            us_, vs_ = s / np.sqrt(h), sig / np.sqrt(h)
            PE = 0.0
            for k in range(3):
                for l in range(3):
                    PE = PE + IBP_COEFFS[k](us_) * IBP_COEFFS[l](vs_) * _bisymbol_values(mixed[k][l], a, b, big)
            reg = 1.0 / ((1 + t**2 / h) * (1 + tau**2 / h))
            total += w1 * w2 * reg * np.sum(wS * PE)
    # c * (2 pi h) from the normalized T weights
    return complex(2 * (2 * np.pi * h) ** -2 * (2 * np.pi * h) * total)


def kernel_s_integral(M: np.ndarray, rep: GaussianRep, X, T, n_s: int = 16, ibp: bool = False) -> complex:
    """int K(S, T) E(X, S, T) dS for fixed real T (or with P_s^T P_sigma^T E when ibp)."""
    x = as_phase_array(X)
    t, tau = T
    h = rep.h
    us, wu = special.roots_hermite(n_s)
    U, V = np.meshgrid(us, us, indexing="ij")
    U, V = U.ravel(), V.ravel()
    wS = np.outer(wu, wu).ravel() * h
    s = 1j * tau / 2 + U * np.sqrt(h)
    sig = -1j * t / 2 + V * np.sqrt(h)
    s2 = np.sqrt(2 * h)
    a = (((x[0] + s + t / 2) + 1j * (x[1] + sig + tau / 2)) / s2)[:, None]
    b = (((x[0] + s - t / 2) - 1j * (x[1] + sig - tau / 2)) / s2)[:, None]
    pref = 2 * (2 * np.pi * h) ** -2 * np.exp(-(t**2 + tau**2) / (2 * h))
    if not ibp:
        return complex(pref * np.sum(wS * _bisymbol_values(np.asarray(M, dtype=complex), a, b, rep)))
    big = rep.with_N(rep.N + 4)
    ds = ibp_transpose(M, rep, 0)
    PE = 0.0
    for k, Dk in enumerate(ds):
        rk = rep.with_N(rep.N + k)
        for l, Dkl in enumerate(ibp_transpose(Dk, rk, 1)):
            Bkl = embed_padded(Dkl, rk.with_N(rk.N + l), big)
            PE = PE + IBP_COEFFS[k](s / np.sqrt(h)) * IBP_COEFFS[l](sig / np.sqrt(h)) * _bisymbol_values(Bkl, a, b, big)
    return complex(pref * np.sum(wS * PE))


def ibp_budget() -> float:
    """Per-pair constant sum_{k,l} (1/2) A_k A_l bounding the regularized kernel integral.

    With |K| e^{|T|^2/4h} = 2 (2 pi h)^{-2} e^{-|S|^2/h} and
    int (1 + t^2/h)^{-1} dt = pi sqrt(h), the integral of each term reduces to
    (1/2) A_k A_l with A_k = int e^{-u^2} |a_k(u)| du.
    """
    # |a_k| has kinks, so integrate each half-line separately
    A = [sum(integrate.quad(lambda u, f=f: np.exp(-u * u) * abs(f(np.array(u))), lo, hi)[0]
             for lo, hi in ((-np.inf, 0.0), (0.0, np.inf)))
         for f in IBP_COEFFS]
    return float(sum(0.5 * A[k] * A[l] for k in range(3) for l in range(3)))


def reconstruction_bound_factor(A: QuadraticForm, h: float, K: float) -> float:
    """prod_j (1 + h K S^2 lambda_j), lambda_j = max(Q(e_j, 0), Q(0, e_j)), S = max(1, max lambda)."""
    d = A.d
    lam = np.array([max(A.matrix[j, j], A.matrix[d + j, d + j]) for j in range(d)])
    S = max(1.0, float(lam.max()))
    return float(np.prod(1 + h * K * S**2 * lam))


def empirical_K(ratio: float, A: QuadraticForm, h: float) -> float:
    """Smallest K with ratio <= prod_j (1 + h K S^2 lambda_j), by bisection."""
    if ratio <= 1.0:
        return 0.0
    lo, hi = 0.0, 1.0
    while reconstruction_bound_factor(A, h, hi) < ratio:
        hi *= 2
        if hi > 1e12:
            return float("inf")
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if reconstruction_bound_factor(A, h, mid) < ratio:
            lo = mid
        else:
            hi = mid
    return hi


def product_matrix(F: Symbol, G: Symbol, rep: GaussianRep, pad: int = 20) -> np.ndarray:
    """Op(F) Op(G) compressed to rep; formed pad levels higher so no intermediate state is lost."""
    big = rep.with_N(rep.N + pad)
    return compress(weyl_quantize(F, big) @ weyl_quantize(G, big), big, rep)


def compose_symbols(F: Symbol, G: Symbol, A: QuadraticForm | None, rep: GaussianRep,
                    config: ReconstructionConfig = ReconstructionConfig(), pad: int = 20) -> ReconstructedSymbol:
    """Reconstructed Weyl symbol of Op(F) Op(G)."""
    P = product_matrix(F, G, rep, pad)
    return reconstruct_symbol(P, None if A is None else A.scaled(4.0), rep, config)


def requantize(F: Symbol, rep: GaussianRep, n_nodes: int | None = None) -> np.ndarray:
    """Op(F) of a symbol known only pointwise, on a smaller rep."""
    return weyl_quantize(F, rep, n_nodes=n_nodes)


def heat_check(F: Symbol, M: np.ndarray, rep: GaussianRep, probes: np.ndarray, n_nodes: int = 10) -> float:
    """max |H_{h/2} F - wick_symbol(M)| over probe points."""
    from .quantize import wick_symbol

    lhs = heat_apply(F, rep.h / 2, n_nodes=n_nodes)(probes)
    rhs = wick_symbol(M, rep)(probes)
    return float(np.max(np.abs(lhs - rhs)))
