"""Truncated Hermite representation of L^2(R^d, mu_{h/2}).

Each coordinate carries the basis e_n(u) = He_n(u / s) / sqrt(n!) with
s = sqrt(h/2), orthonormal for the centered Gaussian of variance h/2. The
d-dimensional basis is the tensor product in C order, so operators on one
coordinate embed through Kronecker products. In this basis the ladder
operator c e_n = sqrt(n) e_{n-1} gives

    x = s (c + c^*),    xi = i s (c^* - c),    [x, xi] = i h.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import special, stats

from .phase_space import PhaseVector, QuadraticForm, as_phase_array, symplectic_form


class TruncationError(ValueError):
    """A truncated object would exceed the configured error ceiling."""


def gauss_hermite(n: int, variance: float) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and probability weights for N(0, variance), exact to degree 2n-1."""
    t, w = special.roots_hermitenorm(n)
    return t * np.sqrt(variance), w / np.sqrt(2 * np.pi)


def tensor_rule(nodes: np.ndarray, weights: np.ndarray, dim: int) -> tuple[np.ndarray, np.ndarray]:
    grids = np.meshgrid(*([nodes] * dim), indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=-1)
    wgrid = np.meshgrid(*([weights] * dim), indexing="ij")
    w = np.prod(np.stack([g.ravel() for g in wgrid], axis=-1), axis=-1)
    return pts, w


def hermite_values(n_max: int, y: np.ndarray) -> np.ndarray:
    """He_n(y)/sqrt(n!) for n = 0..n_max; last axis indexes n. y may be complex."""
    y = np.asarray(y)
    out = np.empty(y.shape + (n_max + 1,), dtype=np.result_type(y, float))
    out[..., 0] = 1.0
    if n_max >= 1:
        out[..., 1] = y
    for n in range(1, n_max):
        out[..., n + 1] = (y * out[..., n] - np.sqrt(n) * out[..., n - 1]) / np.sqrt(n + 1)
    return out


def power_vectors(a: np.ndarray, N: int) -> np.ndarray:
    """a^n / sqrt(n!) for n = 0..N; last axis indexes n."""
    a = np.asarray(a)
    out = np.empty(a.shape + (N + 1,), dtype=np.result_type(a, complex))
    out[..., 0] = 1.0
    for n in range(1, N + 1):
        out[..., n] = out[..., n - 1] * a / np.sqrt(n)
    return out


def poisson_tail(mean: float, N: int) -> float:
    """P(n > N) for a Poisson law."""
    return float(stats.poisson.sf(N, mean))


def ladder(N: int) -> np.ndarray:
    """Annihilation matrix on span(e_0..e_N)."""
    return np.diag(np.sqrt(np.arange(1, N + 1, dtype=float)), k=1)


@dataclass(frozen=True)
class GaussianRep:
    d: int
    N: int
    h: float
    tail_ceiling: float = 1e-6

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("d must be positive")
        if self.N < 1:
            raise ValueError("N must be at least 1")
        if not self.h > 0:
            raise ValueError("h must be positive")

    @property
    def size(self) -> int:
        return (self.N + 1) ** self.d

    @property
    def sigma(self) -> float:
        return float(np.sqrt(self.h / 2))

    @cached_property
    def indices(self) -> np.ndarray:
        """Multi-indices of the tensor basis, shape (size, d)."""
        return np.array(list(itertools.product(range(self.N + 1), repeat=self.d)), dtype=int).reshape(
            -1, self.d
        )

    @cached_property
    def degree(self) -> np.ndarray:
        return self.indices.sum(axis=1)

    def safe_mask(self, margin: int = 4) -> np.ndarray:
        """Basis vectors of total degree <= N - margin."""
        return self.degree <= self.N - margin

    def safe_block(self, M: np.ndarray, margin: int = 4) -> np.ndarray:
        m = self.safe_mask(margin)
        return M[np.ix_(m, m)]

    def with_N(self, N: int) -> "GaussianRep":
        return GaussianRep(self.d, N, self.h, self.tail_ceiling)

    # single-coordinate operators embedded in the tensor basis
    def embed(self, op: np.ndarray, j: int) -> np.ndarray:
        eye = np.eye(self.N + 1)
        out = np.ones((1, 1))
        for k in range(self.d):
            out = np.kron(out, op if k == j else eye)
        return out

    def kron_modes(self, ops) -> np.ndarray:
        out = np.ones((1, 1))
        for op in ops:
            out = np.kron(out, op)
        return out

    def annihilation(self, j: int = 0) -> np.ndarray:
        return self.embed(ladder(self.N), j)

    def creation(self, j: int = 0) -> np.ndarray:
        return self.annihilation(j).T.copy()

    def number(self, j: int | None = None) -> np.ndarray:
        if j is None:
            return np.diag(self.degree.astype(float))
        return np.diag(self.indices[:, j].astype(float))

    def position(self, j: int = 0) -> np.ndarray:
        c = ladder(self.N)
        return self.embed(self.sigma * (c + c.T), j)

    def momentum(self, j: int = 0) -> np.ndarray:
        c = ladder(self.N)
        return self.embed(1j * self.sigma * (c.T - c), j)

    def parity(self) -> np.ndarray:
        return np.diag((-1.0) ** self.degree)

    def identity(self) -> np.ndarray:
        return np.eye(self.size)

    def vacuum(self) -> np.ndarray:
        v = np.zeros(self.size, dtype=complex)
        v[0] = 1.0
        return v

    # quadrature
    def quadrature(self, n_nodes: int | None = None) -> tuple[np.ndarray, np.ndarray]:
        """Tensor Gauss-Hermite rule for mu_{h/2} on R^d (points, weights)."""
        n = 2 * (self.N + 1) if n_nodes is None else n_nodes
        t, w = gauss_hermite(n, self.h / 2)
        return tensor_rule(t, w, self.d)

    def evaluate_basis(self, u: np.ndarray) -> np.ndarray:
        """Basis functions at points u of shape (..., d); returns (..., size)."""
        u = np.asarray(u)
        vals = hermite_values(self.N, u / self.sigma)
        out = vals[..., 0, :]
        for k in range(1, self.d):
            out = (out[..., :, None] * vals[..., k, None, :]).reshape(u.shape[:-1] + (-1,))
        return out

    def gram(self, n_nodes: int | None = None) -> np.ndarray:
        pts, w = self.quadrature(n_nodes)
        E = self.evaluate_basis(pts)
        return (E * w[:, None]).T @ E

    def alpha(self, X) -> np.ndarray:
        """Complex coordinates (x + i xi)/sqrt(2h) of a phase point."""
        z = as_phase_array(X)
        d = z.shape[-1] // 2
        return (z[..., :d] + 1j * z[..., d:]) / np.sqrt(2 * self.h)

    # linear functionals and fields
    def ell(self, a) -> np.ndarray:
        """Multiplication by a.x."""
        a = np.atleast_1d(np.asarray(a, dtype=float))
        if a.size != self.d:
            raise ValueError("dimension mismatch")
        out = np.zeros((self.size, self.size))
        for j in range(self.d):
            if a[j] != 0:
                out = out + a[j] * self.position(j).real
        return out

    def linear_field(self, a, b) -> np.ndarray:
        """Quantization of the linear symbol a.x + b.xi."""
        a = np.atleast_1d(np.asarray(a, dtype=float))
        b = np.atleast_1d(np.asarray(b, dtype=float))
        if a.size != self.d or b.size != self.d:
            raise ValueError("dimension mismatch")
        out = self.ell(a).astype(complex)
        for j in range(self.d):
            if b[j] != 0:
                out = out + b[j] * self.momentum(j)
        return out

    def segal_field(self, V) -> np.ndarray:
        """L_h(V), the quantization of Z -> sigma(Z, V); V = (a, b) gives -b.x + a.xi."""
        v = as_phase_array(V)
        if v.size != 2 * self.d:
            raise ValueError("dimension mismatch")
        return self.linear_field(-v[self.d :], v[: self.d])

    # coherent states
    def coherent_tail(self, X) -> float:
        """Norm of the part of Psi_X beyond the truncation."""
        al = self.alpha(X)
        keep = np.prod([1.0 - poisson_tail(abs(a) ** 2, self.N) for a in np.atleast_1d(al)])
        return float(np.sqrt(max(1.0 - keep, 0.0)))

    def coherent(self, X, check: bool = True) -> "CoherentState":
        return CoherentState.build(self, X, check=check)

    def coherent_vectors(self, Xs: np.ndarray) -> np.ndarray:
        """Coefficient rows for many centers, shape (n, size), no tail check."""
        al = self.alpha(np.asarray(Xs, dtype=float))
        out = None
        for j in range(self.d):
            mode = power_vectors(al[:, j], self.N) * np.exp(-np.abs(al[:, j]) ** 2 / 2)[:, None]
            out = mode if out is None else (out[:, :, None] * mode[:, None, :]).reshape(len(al), -1)
        return out

    def segal_bargmann(self, f: np.ndarray, X) -> complex:
        """T_X f = e^{|X|^2/4h} <f, Psi_X>."""
        z = as_phase_array(X)
        psi = self.coherent(z).coeffs
        return complex(np.exp(z @ z / (4 * self.h)) * np.vdot(psi, f))


def inner(u: np.ndarray, v: np.ndarray) -> complex:
    """<u, v>, linear in u."""
    return complex(np.vdot(v, u))


@dataclass(frozen=True)
class CoherentState:
    center: PhaseVector
    rep: GaussianRep
    coeffs: np.ndarray
    tail: float

    @classmethod
    def build(cls, rep: GaussianRep, X, check: bool = True) -> "CoherentState":
        z = as_phase_array(X)
        if z.size != 2 * rep.d:
            raise ValueError("dimension mismatch")
        tail = rep.coherent_tail(z)
        if check and tail > rep.tail_ceiling:
            raise TruncationError(f"coherent state tail {tail:.2e} above ceiling {rep.tail_ceiling:.1e}")
        coeffs = rep.coherent_vectors(z[None, :])[0]
        return cls(PhaseVector.from_array(z), rep, coeffs, tail)

    def overlap(self, other: "CoherentState") -> complex:
        return inner(self.coeffs, other.coeffs)


def coherent_overlap_exact(X, Y, h: float) -> complex:
    """Closed form of <Psi_X, Psi_Y>."""
    x = as_phase_array(X)
    y = as_phase_array(Y)
    return complex(np.exp(-np.sum((x - y) ** 2) / (4 * h) + 1j * symplectic_form(x, y) / (2 * h)))


# stochastic extensions


def k_constant(p: float) -> float:
    """K(p) = 2^{1/2} pi^{-1/2p} Gamma((p+1)/2)^{1/p}."""
    return float(np.sqrt(2) * np.pi ** (-1 / (2 * p)) * special.gamma((p + 1) / 2) ** (1 / p))


def cauchy_constants(p: float, trace: float) -> tuple[float, float]:
    """(C(p), alpha(p)) of the stochastic-extension estimate."""
    if p < 1:
        raise ValueError("p must be >= 1")
    if p >= 2:
        return k_constant(p) * trace ** (0.5 - 1 / p), p
    return 1.0, 2.0


@dataclass(frozen=True)
class StochasticSamplePlan:
    """Nested subspaces E_small within E_large of R^D, given by orthonormal frames (columns)."""

    small: np.ndarray
    large: np.ndarray
    samples: int = 100_000
    p: float = 2.0
    h: float = 1.0

    def __post_init__(self):
        for F in (self.small, self.large):
            if F.size and np.abs(F.T @ F - np.eye(F.shape[1])).max() > 1e-12:
                raise ValueError("frames must be orthonormal")
        if self.small.size:
            resid = self.small - self.large @ (self.large.T @ self.small)
            if np.abs(resid).max() > 1e-10:
                raise ValueError("subspaces are not nested")
        if self.samples < 2:
            raise ValueError("empty plan")
        if self.p < 1:
            raise ValueError("p must be >= 1")

    @property
    def dim(self) -> int:
        return self.large.shape[0]

    def projector(self, which: str) -> np.ndarray:
        F = self.small if which == "small" else self.large
        return F @ F.T


def coordinate_ladder(D: int, sizes) -> list[np.ndarray]:
    """Frames spanned by the first k coordinate vectors for each k in sizes."""
    eye = np.eye(D)
    return [eye[:, :k] for k in sizes]


@dataclass
class CauchyReport:
    estimate: float
    ci_low: float
    ci_high: float
    bound: float
    bound_small: float
    bound_large: float
    seminorm: float
    passed: bool
    exponent_note: str = ""
    samples: int = 0
    extra: dict = field(default_factory=dict)


def _tail_sum(A: QuadraticForm, P: np.ndarray, alpha: float) -> float:
    vecs = A.eigenvectors
    lam = A.eigenvalues
    res = np.linalg.norm(vecs - P @ vecs, axis=0)
    return float(np.sum(lam * res**alpha) ** (1 / alpha))


def stochastic_cauchy_check(f, plan: StochasticSamplePlan, A: QuadraticForm, seminorm: float, rng,
                            confidence: float = 0.99) -> CauchyReport:
    """Monte-Carlo L^p distance between f o pi_large and f o pi_small under N(0, h I).

    The comparison value is the sum of the estimate's right-hand sides for
    both subspaces (triangle inequality through the limit); when the large
    subspace is the whole space its term vanishes. A violation is declared
    only if the lower confidence limit exceeds the bound.
    """
    D = plan.dim
    if A.matrix.shape[0] != D:
        raise ValueError("dimension mismatch")
    C, alpha = cauchy_constants(plan.p, A.trace())
    Ps, Pl = plan.projector("small"), plan.projector("large")
    z = rng.standard_normal((plan.samples, D)) * np.sqrt(plan.h)
    g = np.abs(f(z @ Pl.T) - f(z @ Ps.T)) ** plan.p
    n = g.size
    mean = float(g.mean())
    se = float(g.std(ddof=1) / np.sqrt(n))
    tq = float(stats.t.ppf(0.5 + confidence / 2, n - 1))
    lo, hi = max(mean - tq * se, 0.0), mean + tq * se
    est = mean ** (1 / plan.p)
    bs = C * np.sqrt(plan.h) * seminorm * _tail_sum(A, Ps, alpha)
    bl = C * np.sqrt(plan.h) * seminorm * _tail_sum(A, Pl, alpha)
    bound = bs + bl
    note = ""
    if plan.p < 2:
        note = "C(p)=1 and alpha=2 below p=2; the constant jumps at p=2"
    return CauchyReport(
        estimate=est,
        ci_low=lo ** (1 / plan.p),
        ci_high=hi ** (1 / plan.p),
        bound=float(bound),
        bound_small=float(bs),
        bound_large=float(bl),
        seminorm=float(seminorm),
        passed=bool(lo ** (1 / plan.p) <= bound),
        exponent_note=note,
        samples=n,
    )
