"""Phase-space symbols with derivative oracles and seminorm estimates.

A symbol is a function on R^{2d}. Each class below evaluates on arrays of
points with shape (..., 2d), returns directional derivatives, and, when it
factors over the coordinate pairs (x_j, xi_j), exposes that factorization so
quantization can work one coordinate pair at a time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .phase_space import QuadraticForm

# A separable term is (coefficient, [f_0, ..., f_{d-1}]) with f_j(x_j, xi_j).
ModeFactor = Callable[[np.ndarray, np.ndarray], np.ndarray]
SeparableTerm = tuple[complex, list]


def _one(x, xi):
    return np.ones(np.broadcast(x, xi).shape)


class Symbol:
    kind = "generic"

    def __init__(self, d: int):
        self.d = d

    def __call__(self, Z) -> np.ndarray:
        raise NotImplementedError

    def derivative(self, Z, Us: Sequence[np.ndarray]) -> np.ndarray:
        """d^m F(Z)(U_1, ..., U_m) by central finite differences."""
        return fd_derivative(self, Z, Us)

    def separable_terms(self) -> list | None:
        return None

    def sup_bound(self) -> float:
        return math.inf

    def compose_linear(self, chi: np.ndarray) -> "Symbol":
        return ComposedSymbol(self, np.asarray(chi, dtype=float))

    def __add__(self, other: "Symbol") -> "Symbol":
        return SumSymbol([self, other])

    def scale(self, c: complex) -> "Symbol":
        return SumSymbol([self], [c])

    @property
    def is_real(self) -> bool:
        return False


def fd_derivative(F: Symbol, Z, Us, step: float = 1e-3) -> np.ndarray:
    """Mixed directional derivative by nested central differences (order 2 Richardson)."""
    Z = np.asarray(Z, dtype=float)
    Us = [np.asarray(u, dtype=float) for u in Us]
    if not Us:
        return F(Z)

    def nested(Zc, k, hstep):
        if k == len(Us):
            return F(Zc)
        u = Us[k]
        return (nested(Zc + hstep * u, k + 1, hstep) - nested(Zc - hstep * u, k + 1, hstep)) / (2 * hstep)

    coarse = nested(Z, 0, 2 * step)
    fine = nested(Z, 0, step)
    return (4 * fine - coarse) / 3


@dataclass
class ConstantSymbol(Symbol):
    value: complex
    dim: int

    def __post_init__(self):
        Symbol.__init__(self, self.dim)

    kind = "bounded"

    def __call__(self, Z):
        Z = np.asarray(Z, dtype=float)
        return np.full(Z.shape[:-1], self.value, dtype=complex if np.iscomplexobj(self.value) else float)

    def derivative(self, Z, Us):
        if len(Us) == 0:
            return self(Z)
        return np.zeros(np.asarray(Z).shape[:-1])

    def separable_terms(self):
        return [(self.value, [_one] * self.d)]

    def sup_bound(self):
        return abs(self.value)

    def compose_linear(self, chi):
        return self

    @property
    def is_real(self):
        return np.isrealobj(self.value) or np.imag(self.value) == 0


class LinearSymbol(Symbol):
    """F(Z) = v.Z."""

    kind = "linear"

    def __init__(self, v):
        v = np.asarray(v, dtype=float)
        super().__init__(v.size // 2)
        self.v = v

    def __call__(self, Z):
        return np.asarray(Z, dtype=float) @ self.v

    def derivative(self, Z, Us):
        shape = np.asarray(Z).shape[:-1]
        if len(Us) == 0:
            return self(Z)
        if len(Us) == 1:
            return np.broadcast_to(np.asarray(Us[0]) @ self.v, shape).astype(float)
        return np.zeros(shape)

    def separable_terms(self):
        d = self.d
        terms = []
        for j in range(d):
            for coef, pick in ((self.v[j], 0), (self.v[d + j], 1)):
                if coef != 0:
                    f = (lambda x, xi: x) if pick == 0 else (lambda x, xi: xi)
                    terms.append((coef, [f if k == j else _one for k in range(d)]))
        return terms or [(0.0, [_one] * d)]

    def compose_linear(self, chi):
        return LinearSymbol(np.asarray(chi).T @ self.v)

    @property
    def is_real(self):
        return True


class QuadraticSymbol(Symbol):
    """F(Z) = Z^T M Z + v.Z + c with M symmetric."""

    kind = "quadratic"

    def __init__(self, M, v=None, c: float = 0.0):
        M = np.asarray(M, dtype=float)
        M = 0.5 * (M + M.T)
        super().__init__(M.shape[0] // 2)
        self.M = M
        self.v = np.zeros(M.shape[0]) if v is None else np.asarray(v, dtype=float)
        self.c = float(c)

    @classmethod
    def oscillator(cls, d: int) -> "QuadraticSymbol":
        """|Z|^2 = sum_j x_j^2 + xi_j^2."""
        return cls(np.eye(2 * d))

    def __call__(self, Z):
        Z = np.asarray(Z, dtype=float)
        return np.einsum("...i,ij,...j->...", Z, self.M, Z) + Z @ self.v + self.c

    def derivative(self, Z, Us):
        Z = np.asarray(Z, dtype=float)
        shape = Z.shape[:-1]
        m = len(Us)
        if m == 0:
            return self(Z)
        if m == 1:
            u = np.asarray(Us[0])
            return 2 * (Z @ self.M) @ u + self.v @ u
        if m == 2:
            return np.broadcast_to(2 * np.asarray(Us[0]) @ self.M @ np.asarray(Us[1]), shape).astype(float)
        return np.zeros(shape)

    def separable_terms(self):
        d = self.d
        terms = []

        def coord(k):
            if k < d:
                return k, (lambda x, xi: x)
            return k - d, (lambda x, xi: xi)

        n = 2 * d
        for k in range(n):
            for l in range(k, n):
                coef = self.M[k, l] * (1 if k == l else 2)
                if coef == 0:
                    continue
                jk, fk = coord(k)
                jl, fl = coord(l)
                facs = [_one] * d
                if jk == jl:
                    facs[jk] = (lambda a, b: (lambda x, xi: a(x, xi) * b(x, xi)))(fk, fl)
                else:
                    facs[jk] = fk
                    facs[jl] = fl
                terms.append((coef, facs))
        terms += LinearSymbol(self.v).separable_terms() if np.any(self.v) else []
        if self.c:
            terms.append((self.c, [_one] * d))
        return terms

    def compose_linear(self, chi):
        chi = np.asarray(chi, dtype=float)
        return QuadraticSymbol(chi.T @ self.M @ chi, chi.T @ self.v, self.c)

    @property
    def is_real(self):
        return True


class ExpSymbol(Symbol):
    """F(Z) = sum_k c_k exp(i a_k.Z) with complex c_k and real frequencies a_k."""

    kind = "trigonometric"

    def __init__(self, coeffs, freqs):
        freqs = np.atleast_2d(np.asarray(freqs, dtype=float))
        super().__init__(freqs.shape[1] // 2)
        self.coeffs = np.atleast_1d(np.asarray(coeffs, dtype=complex))
        self.freqs = freqs

    def __call__(self, Z):
        Z = np.asarray(Z, dtype=float)
        return np.exp(1j * Z @ self.freqs.T) @ self.coeffs

    def derivative(self, Z, Us):
        Z = np.asarray(Z, dtype=float)
        fac = np.ones(len(self.coeffs), dtype=complex)
        for u in Us:
            fac = fac * (1j * (self.freqs @ np.asarray(u)))
        return np.exp(1j * Z @ self.freqs.T) @ (self.coeffs * fac)

    def separable_terms(self):
        d = self.d
        terms = []
        for c, a in zip(self.coeffs, self.freqs):
            facs = []
            for j in range(d):
                ax, axi = a[j], a[d + j]
                facs.append((lambda ax, axi: (lambda x, xi: np.exp(1j * (ax * x + axi * xi))))(ax, axi))
            terms.append((c, facs))
        return terms

    def sup_bound(self):
        return float(np.abs(self.coeffs).sum())

    def compose_linear(self, chi):
        return ExpSymbol(self.coeffs, self.freqs @ np.asarray(chi, dtype=float))

    def heat_exact(self, t: float) -> "ExpSymbol":
        """Gaussian convolution of variance t in every coordinate."""
        damp = np.exp(-t * np.sum(self.freqs**2, axis=1) / 2)
        return ExpSymbol(self.coeffs * damp, self.freqs)


class TrigSymbol(ExpSymbol):
    """F(Z) = sum_k c_k cos(a_k.Z + phi_k) with real c_k."""

    def __init__(self, amps, freqs, phases=None):
        freqs = np.atleast_2d(np.asarray(freqs, dtype=float))
        amps = np.atleast_1d(np.asarray(amps, dtype=float))
        phases = np.zeros(len(amps)) if phases is None else np.atleast_1d(np.asarray(phases, dtype=float))
        self.amps = amps
        self.phases = phases
        self.trig_freqs = freqs
        coeffs = np.concatenate([0.5 * amps * np.exp(1j * phases), 0.5 * amps * np.exp(-1j * phases)])
        super().__init__(coeffs, np.vstack([freqs, -freqs]))

    def __call__(self, Z):
        Z = np.asarray(Z, dtype=float)
        return np.cos(Z @ self.trig_freqs.T + self.phases) @ self.amps

    def derivative(self, Z, Us):
        Z = np.asarray(Z, dtype=float)
        fac = np.ones(len(self.amps))
        for u in Us:
            fac = fac * (self.trig_freqs @ np.asarray(u))
        m = len(Us)
        return np.cos(Z @ self.trig_freqs.T + self.phases + m * np.pi / 2) @ (self.amps * fac)

    def sup_bound(self):
        return float(np.abs(self.amps).sum())

    def compose_linear(self, chi):
        return TrigSymbol(self.amps, self.trig_freqs @ np.asarray(chi, dtype=float), self.phases)

    @property
    def is_real(self):
        return True

    @classmethod
    def random(cls, d: int, rng, max_terms: int = 3, max_freq: float = 2.0) -> "TrigSymbol":
        k = int(rng.integers(1, max_terms + 1))
        freqs = rng.standard_normal((k, 2 * d))
        radii = max_freq * rng.random(k)
        freqs = freqs / np.linalg.norm(freqs, axis=1, keepdims=True) * radii[:, None]
        amps = rng.uniform(-1, 1, k)
        phases = rng.uniform(0, 2 * np.pi, k)
        return cls(amps, freqs, phases)


class GaussianSymbol(Symbol):
    """F(Z) = amp * exp(-|Z - center|^2 / width)."""

    kind = "gaussian"

    def __init__(self, center, width: float, amp: complex = 1.0):
        center = np.asarray(center, dtype=float)
        super().__init__(center.size // 2)
        self.center = center
        self.width = float(width)
        self.amp = amp

    def __call__(self, Z):
        Z = np.asarray(Z, dtype=float)
        return self.amp * np.exp(-np.sum((Z - self.center) ** 2, axis=-1) / self.width)

    def separable_terms(self):
        d = self.d
        facs = []
        for j in range(d):
            cx, cxi = self.center[j], self.center[d + j]
            facs.append(
                (lambda cx, cxi: (lambda x, xi: np.exp(-((x - cx) ** 2 + (xi - cxi) ** 2) / self.width)))(cx, cxi)
            )
        return [(self.amp, facs)]

    def sup_bound(self):
        return abs(self.amp)

    @property
    def is_real(self):
        return np.imag(self.amp) == 0


class CallableSymbol(Symbol):
    """Wraps a vectorized function of Z; derivatives by finite differences."""

    def __init__(self, fn, d: int, kind: str = "generic", real: bool = False, sup: float = math.inf):
        super().__init__(d)
        self.fn = fn
        self.kind = kind
        self._real = real
        self._sup = sup

    def __call__(self, Z):
        return self.fn(np.asarray(Z, dtype=float))

    def sup_bound(self):
        return self._sup

    @property
    def is_real(self):
        return self._real


class ComposedSymbol(Symbol):
    def __init__(self, base: Symbol, chi: np.ndarray):
        super().__init__(base.d)
        self.base = base
        self.chi = chi
        self.kind = base.kind

    def __call__(self, Z):
        return self.base(np.asarray(Z, dtype=float) @ self.chi.T)

    def derivative(self, Z, Us):
        Z = np.asarray(Z, dtype=float)
        return self.base.derivative(Z @ self.chi.T, [self.chi @ np.asarray(u) for u in Us])

    def sup_bound(self):
        return self.base.sup_bound()

    @property
    def is_real(self):
        return self.base.is_real


class SumSymbol(Symbol):
    def __init__(self, parts: list, weights=None):
        super().__init__(parts[0].d)
        self.parts = parts
        self.weights = [1.0] * len(parts) if weights is None else list(weights)
        kinds = {p.kind for p in parts}
        self.kind = kinds.pop() if len(kinds) == 1 else "generic"

    def __call__(self, Z):
        return sum(w * p(Z) for w, p in zip(self.weights, self.parts))

    def derivative(self, Z, Us):
        return sum(w * p.derivative(Z, Us) for w, p in zip(self.weights, self.parts))

    def separable_terms(self):
        out = []
        for w, p in zip(self.weights, self.parts):
            terms = p.separable_terms()
            if terms is None:
                return None
            out += [(w * c, f) for c, f in terms]
        return out

    def sup_bound(self):
        return float(sum(abs(w) * p.sup_bound() for w, p in zip(self.weights, self.parts)))

    def compose_linear(self, chi):
        return SumSymbol([p.compose_linear(chi) for p in self.parts], self.weights)

    @property
    def is_real(self):
        return all(p.is_real for p in self.parts) and all(np.imag(w) == 0 for w in self.weights)


# seminorm estimation


def direction_pool(A: QuadraticForm, rng, n_random: int = 32, extra=None) -> np.ndarray:
    """Q_A-unit directions: eigendirections, random mixtures and extra candidates."""
    basis, lam = A.range_basis()
    dirs = [basis[:, k] / np.sqrt(lam[k]) for k in range(lam.size)]
    if lam.size:
        w = rng.standard_normal((n_random, lam.size))
        for row in w:
            u = basis @ (row / np.sqrt(lam))
            dirs.append(u / np.sqrt(A(u)))
    for u in extra or []:
        u = np.asarray(u, dtype=float)
        q = A(u)
        if q > 0:
            dirs.append(u / np.sqrt(q))
    return np.array(dirs).reshape(-1, 2 * A.d)


def dual_directions(F: Symbol, A: QuadraticForm) -> list:
    """For exponential-type symbols, A^+ a_k maximizes |a_k.U| at Q_A(U) = 1."""
    if not isinstance(F, ExpSymbol):
        if isinstance(F, LinearSymbol):
            return [np.linalg.pinv(A.matrix) @ F.v]
        return []
    pinv = np.linalg.pinv(A.matrix)
    freqs = F.trig_freqs if isinstance(F, TrigSymbol) else F.freqs
    return [pinv @ a for a in freqs]


@dataclass
class SeminormEstimate:
    value: float
    order: int
    n_points: int
    n_directions: int
    argmax: dict = field(default_factory=dict)


def symbol_seminorm(F: Symbol, m: int, A: QuadraticForm, sample_budget: int = 256, rng=None,
                    point_scale: float = 1.0) -> float:
    """Lower estimate of sup |d^m F(X)(U,...,U)| / Q_A(U)^{m/2}.

    Only the order-m derivative enters; symbol_norm takes the maximum over
    orders. Repeated directions suffice because d^m F(X) is a symmetric form
    and Q_A^{1/2} is a Hilbert seminorm, so the diagonal supremum equals the
    supremum over all tuples.
    """
    return symbol_seminorm_report(F, m, A, sample_budget, rng, point_scale).value


def symbol_seminorm_report(F: Symbol, m: int, A: QuadraticForm, sample_budget: int = 256, rng=None,
                           point_scale: float = 1.0) -> SeminormEstimate:
    if m < 0:
        raise ValueError("order must be nonnegative")
    rng = np.random.default_rng(0) if rng is None else rng
    dirs = direction_pool(A, rng, extra=dual_directions(F, A))
    if m > 0 and len(dirs) == 0:
        return SeminormEstimate(0.0, m, 0, 0)
    n_pts = max(sample_budget, 1)
    pts = rng.standard_normal((n_pts, 2 * F.d)) * point_scale
    pts[0] = 0.0
    # points where the trigonometric factors peak along each frequency
    if isinstance(F, TrigSymbol):
        for a, ph in zip(F.trig_freqs, F.phases):
            nrm = a @ a
            if nrm > 0:
                for k in range(4):
                    theta = -ph - m * np.pi / 2 + k * np.pi / 2
                    pts = np.vstack([pts, (theta / nrm) * a])
    best, arg = 0.0, {}
    if m == 0:
        vals = np.abs(F(pts))
        k = int(np.argmax(vals))
        return SeminormEstimate(float(vals[k]), 0, len(pts), 0, {"point": pts[k]})
    for u in dirs:
        vals = np.abs(F.derivative(pts, [u] * m))
        k = int(np.argmax(vals))
        if vals[k] > best:
            best, arg = float(vals[k]), {"point": pts[k], "direction": u}
    return SeminormEstimate(best, m, len(pts), len(dirs), arg)


def symbol_norm(F: Symbol, p: int, A: QuadraticForm, sample_budget: int = 256, rng=None) -> float:
    """Lower estimate of ||F||_{p,Q_A} = max over orders m <= p."""
    rng = np.random.default_rng(0) if rng is None else rng
    return max(symbol_seminorm(F, m, A, sample_budget, rng) for m in range(p + 1))


def trig_seminorm_upper(F: TrigSymbol, m: int, A: QuadraticForm) -> float:
    """sum_k |c_k| (a_k^T A^+ a_k)^{m/2}, an upper bound of the order-m seminorm."""
    pinv = np.linalg.pinv(A.matrix)
    return float(sum(abs(c) * (a @ pinv @ a) ** (m / 2) for c, a in zip(F.amps, F.trig_freqs)))
