"""Acceptance suites: each turns a config into a list of checks."""

from __future__ import annotations

import time

import numpy as np
from scipy import linalg

from .beals import (
    beals_seminorm_estimate,
    compose_symbols,
    compress,
    empirical_K,
    heat_check,
    product_matrix,
    reconstruct_symbol,
    reconstruction_bound_factor,
)
from .config import ExperimentConfig
from .gaussian_rep import (
    GaussianRep,
    ladder,
    StochasticSamplePlan,
    TruncationError,
    coherent_overlap_exact,
    coordinate_ladder,
    stochastic_cauchy_check,
)
from .metaplectic import (
    apply_dilation,
    apply_rotation,
    apply_shear,
    dilation_map,
    rotation_map,
    shear_map,
    u_apply,
)
from .phase_space import QuadraticForm, cv_bound_factor, geometric_form, random_symplectic
from .qed import (
    ModeSet,
    SpinRegister,
    commutator_bound_check,
    hamiltonian,
    observable_evolution,
    qt_form,
    qt_riemann,
    reduced_beals_profile,
)
from .quantize import displacement, weyl_norm, weyl_quantize, weyl_translate, wick_symbol, wigner
from .records import Check, RunRecord, inconclusive
from .symbols import (
    ConstantSymbol,
    ExpSymbol,
    LinearSymbol,
    QuadraticSymbol,
    TrigSymbol,
    direction_pool,
    symbol_norm,
    trig_seminorm_upper,
)


def item_rngs(seed: int, n: int) -> list:
    """Independent generator per corpus item, split from the master seed."""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(n)]


def _corpus_symbol(cfg: ExperimentConfig, d: int, rng) -> TrigSymbol | ConstantSymbol:
    if cfg.corpus.kind == "constant":
        return ConstantSymbol(1.0, d)
    return TrigSymbol.random(d, rng, cfg.corpus.max_terms, cfg.corpus.max_freq)


def _corpus_form(cfg: ExperimentConfig, d: int, rng) -> QuadraticForm:
    ratio = rng.uniform(0.1, 0.9) if cfg.form.random_ratio else cfg.form.ratio
    return geometric_form(d, ratio, cfg.form.scale, rng if cfg.form.rotate else None)


def _grid(cfg: ExperimentConfig):
    """(d, h) for corpus item i, cycling through the configured grids."""
    ds = [int(x) for x in cfg.d]
    hs = [float(x) for x in cfg.h]
    return lambda i: (ds[i % len(ds)], hs[(i // len(ds)) % len(hs)])


def _probes(rng, n: int, d: int, h: float, radius: float = 2.0) -> np.ndarray:
    """Points with every coordinate pair inside |X_j| <= radius sqrt(h)."""
    r = radius * np.sqrt(h) * np.sqrt(rng.random((n, d)))
    phi = 2 * np.pi * rng.random((n, d))
    return np.concatenate([r * np.cos(phi), r * np.sin(phi)], axis=1)


# calculus


def suite_cv_bound(cfg: ExperimentConfig) -> list:
    """||Op(F)|| on the safe block <= ||F||_{4d, Q_A} cv_bound_factor(A, h)."""
    out = []
    grid = _grid(cfg)
    for i, rng in enumerate(item_rngs(cfg.seed, cfg.corpus.count)):
        d, h = grid(i)
        F = _corpus_symbol(cfg, d, rng)
        A = _corpus_form(cfg, d, rng)
        rep = GaussianRep(d, cfg.work_N(d), h)
        M = weyl_quantize(F, rep)
        measured = weyl_norm(M, rep, cfg.margin)
        # ||Op(F)|| <= sum |c_k| for exponential sums, so the bound holds for the untruncated
        # operator whenever that a priori value is below it
        norm_upper = F.sup_bound() if isinstance(F, ExpSymbol) else measured
        semi = symbol_norm(F, 4 * d, A, rng=rng)
        upper = max(trig_seminorm_upper(F, m, A) for m in range(4 * d + 1)) if isinstance(F, TrigSymbol) else semi
        factor = cv_bound_factor(A, h)
        bound = semi * factor
        out.append(Check(f"cv-{i:03d}", "cv-bound", measured, bound, certificate=max(norm_upper - bound, 0.0),
                         cert_tol=0.0,
                         params={"symbol_id": i, "d": d, "h": h, "seminorm": semi, "seminorm_upper": upper,
                                 "factor": factor, "norm_upper": norm_upper}))
    return out


def suite_wick_heat(cfg: ExperimentConfig) -> list:
    """Wick symbol = H_{h/2} of the Weyl symbol, coherent-state laws and the oscillator spectrum."""
    out = []
    grid = _grid(cfg)
    tol = cfg.tol("wick_heat", 1e-6)
    for i, rng in enumerate(item_rngs(cfg.seed, cfg.corpus.count)):
        d, h = grid(i)
        F = _corpus_symbol(cfg, d, rng)
        rep = GaussianRep(d, cfg.work_N(d), h)
        M = weyl_quantize(F, rep)
        pts = _probes(rng, cfg.probes, d, h)
        heated = F.heat_exact(h / 2) if isinstance(F, TrigSymbol) else F
        try:
            dev = float(np.max(np.abs(wick_symbol(M, rep)(pts) - heated(pts))))
        except TruncationError as exc:
            out.append(inconclusive(f"wick-{i:03d}", "wick-heat", str(exc), {"d": d, "h": h}))
            continue
        out.append(Check(f"wick-{i:03d}", "wick-heat", dev, tol * (1 + F.sup_bound()),
                         params={"symbol_id": i, "d": d, "h": h}))
    out.extend(_coherent_checks(cfg))
    out.extend(_oscillator_checks(cfg))
    return out


def _coherent_checks(cfg: ExperimentConfig, pairs: int = 100) -> list:
    out = []
    N = max(cfg.work_N(1), 30)
    for h in [float(x) for x in cfg.h]:
        rep = GaussianRep(1, N, h)
        rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, int(round(1e6 * h))]))
        X = _probes(rng, pairs, 1, h)
        Y = _probes(rng, pairs, 1, h)
        psiX = rep.coherent_vectors(X)
        psiY = rep.coherent_vectors(Y)
        num = np.einsum("ij,ij->i", np.conj(psiY), psiX)
        exact = np.array([coherent_overlap_exact(x, y, h) for x, y in zip(X, Y)])
        out.append(Check(f"overlap-h{h}", "coherent-overlap", float(np.max(np.abs(num - exact))), 1e-8,
                         params={"h": h, "pairs": pairs, "N": N}))
        worst = 0.0
        for psi, x, z in zip(psiX, X, Y):
            val = wigner(psi, psi, rep)(z[None])[0]
            ref = np.exp(-(x @ x) / h + 2 * (x @ z) / h)
            worst = max(worst, abs(val - ref))
        out.append(Check(f"wigner-h{h}", "coherent-wigner", float(worst), 1e-8,
                         params={"h": h, "pairs": pairs, "N": N}))
    return out


def _oscillator_checks(cfg: ExperimentConfig, N: int = 60) -> list:
    out = []
    for h in (0.5, 1.0):
        rep = GaussianRep(1, N, h)
        M = weyl_quantize(QuadraticSymbol.oscillator(1), rep)
        ev = np.linalg.eigvalsh(0.5 * (M + M.conj().T))[: N // 2 + 1]
        ref = h * (2 * np.arange(N // 2 + 1) + 1)
        out.append(Check(f"oscillator-h{h}", "oscillator", float(np.max(np.abs(ev - ref))), 1e-8,
                         params={"h": h, "N": N}))
    return out


# metaplectic covariance


def _random_unitary(d: int, rng) -> np.ndarray:
    Z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    q, r = np.linalg.qr(Z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def _columns(rep: GaussianRep, degree: int) -> tuple[np.ndarray, np.ndarray]:
    keep = rep.degree <= degree
    return keep, np.eye(rep.size, dtype=complex)[:, keep]


def _apply_mode(op: np.ndarray, j: int, rep: GaussianRep, V: np.ndarray) -> np.ndarray:
    T = V.reshape((rep.N + 1,) * rep.d + (-1,))
    T = np.moveaxis(np.tensordot(op, T, axes=([1], [j])), 0, j)
    return T.reshape(V.shape)


def _apply_exp(F: ExpSymbol, rep: GaussianRep, V: np.ndarray) -> np.ndarray:
    """Op(F) V term by term, each term a product of one-mode displacements."""
    d = rep.d
    out = np.zeros_like(V, dtype=complex)
    for c, a in zip(F.coeffs, F.freqs):
        W = V.astype(complex)
        al = np.atleast_1d(rep.alpha(rep.h * np.concatenate([-a[d:], a[:d]])))
        for j in range(d):
            W = _apply_mode(displacement(al[j], rep.N), j, rep, W)
        out += c * W
    return out


def _apply_segal(V: np.ndarray, rep: GaussianRep, X: np.ndarray) -> np.ndarray:
    """L_h(V) X = (-b.x + a.xi) X for V = (a, b)."""
    d = rep.d
    c = ladder(rep.N)
    x1 = rep.sigma * (c + c.T)
    xi1 = 1j * rep.sigma * (c.T - c)
    out = np.zeros_like(X, dtype=complex)
    for j in range(d):
        out += -V[d + j] * _apply_mode(x1, j, rep, X) + V[j] * _apply_mode(xi1, j, rep, X)
    return out


def _covariance_dev(UV: np.ndarray, chi: np.ndarray, F: TrigSymbol, rep: GaussianRep, low: GaussianRep) -> float:
    """||(U^* Op(F) U - Op(F o chi)) on total degree <= low.N|| from the columns UV."""
    lhs = UV.conj().T @ _apply_exp(F, rep, UV)
    return float(np.linalg.norm(lhs - _low_block(weyl_quantize(F.compose_linear(chi), low), low), 2))


def _low_block(M: np.ndarray, low: GaussianRep) -> np.ndarray:
    """Entries between basis vectors of total degree <= low.N; compressions agree there for every N."""
    keep = low.degree <= low.N
    return M[np.ix_(keep, keep)]


def _unitarity(UV: np.ndarray) -> float:
    return float(np.linalg.norm(UV.conj().T @ UV - np.eye(UV.shape[1]), 2))


def suite_covariance(cfg: ExperimentConfig, composites: int = 20) -> list:
    """U_chi^* Op(F) U_chi = Op(F o chi) for the generators and random composites.

    U_chi is applied column by column to the basis vectors of total degree
    <= check_degree, so the working truncation can be large while only the
    low-degree block is compared.
    """
    out = []
    tol = cfg.tol("covariance", 1e-6)
    for d in [int(x) for x in cfg.d]:
        if d > 2:
            raise ValueError("covariance suite supports d <= 2")
        N = cfg.work_N(d)
        h = float(cfg.h[0])
        rep = GaussianRep(d, N, h)
        deg = cfg.check_degree if cfg.check_degree >= 0 else N - cfg.margin
        keep, E = _columns(rep, deg)
        low = GaussianRep(d, deg, h)
        p = {"d": d, "N": N, "degree": deg}
        rngs = item_rngs(cfg.seed + 1000 * d, composites + 3)
        rng = rngs[0]
        a = rng.standard_normal(2 * d)
        F = TrigSymbol([1.0], [a / np.linalg.norm(a)], [0.3])
        chi1 = rotation_map(_random_unitary(d, rng))
        S = rng.standard_normal((d, d)) * 0.3
        S = 0.5 * (S + S.T)
        T = rng.standard_normal((d, d)) * 0.15
        T = linalg.expm(0.5 * (T + T.T))
        gens = {
            "rotation": (apply_rotation(chi1, rep, E), chi1.matrix),
            "shear": (apply_shear(S, rep, E), shear_map(S).matrix),
            "dilation": (apply_dilation(T, rep, E), dilation_map(T).matrix),
        }
        for name, (UV, chi) in gens.items():
            out.append(Check(f"{name}-d{d}", "generator", _covariance_dev(UV, chi, F, rep, low), tol, params=p))
            out.append(Check(f"{name}-unitary-d{d}", "unitarity", _unitarity(UV), tol, params=p))
        for k in range(composites):
            chi = random_symplectic(d, rngs[k + 1], 0.3)
            UV = u_apply(chi, rep, E)
            out.append(Check(f"composite-{k:02d}-d{d}", "composite", _covariance_dev(UV, chi.matrix, F, rep, low),
                             tol, params=p))
        # projective law on a further pair, and Segal-field covariance
        r = rngs[-2]
        chi_a = random_symplectic(d, r, 0.3)
        chi_b = random_symplectic(d, r, 0.3)
        Uab = u_apply(chi_a @ chi_b, rep, E)
        Uprod = u_apply(chi_a, rep, u_apply(chi_b, rep, E))
        c00 = complex(Uab[0, 0] / Uprod[0, 0])
        out.append(Check(f"projective-modulus-d{d}", "projective", abs(abs(c00) - 1.0), tol,
                         params={**p, "scalar": [c00.real, c00.imag]}))
        # U_a is applied to the already truncated columns of U_b, so rows near N carry two truncations
        resid = float(np.linalg.norm((Uab - c00 * Uprod)[keep], 2))
        out.append(Check(f"projective-residual-d{d}", "projective", resid, tol, params=p))
        V = rngs[-1].standard_normal(2 * d)
        UV = u_apply(chi_a, rep, E)
        lhs = UV.conj().T @ _apply_segal(V, rep, UV)
        rhs = _low_block(low.segal_field(chi_a.inverse().matrix @ V), low)
        out.append(Check(f"segal-d{d}", "segal", float(np.linalg.norm(lhs - rhs, 2)), tol, params=p))
    return out


# Beals characterization and composition


def _grid41(h: float) -> np.ndarray:
    k = np.arange(41)
    r = 3 * np.sqrt(h) * k / 40
    phi = k * np.pi * (3 - np.sqrt(5))
    return np.stack([r * np.cos(phi), r * np.sin(phi)], axis=1)


def _beals_corpus(cfg: ExperimentConfig, rep: GaussianRep) -> list:
    """(name, matrix, true symbol or None) for d = 1."""
    rngs = item_rngs(cfg.seed, cfg.corpus.count)
    h = rep.h
    items = []
    for i, rng in enumerate(rngs):
        slot = i % 5
        if slot in (0, 1):
            F = TrigSymbol.random(1, rng, cfg.corpus.max_terms, cfg.corpus.max_freq)
            items.append((f"trig-{i}", weyl_quantize(F, rep), F))
        elif slot == 2:
            c = complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
            items.append((f"constant-{i}", c * np.eye(rep.size), ConstantSymbol(c, 1)))
        elif slot == 3:
            X0 = _probes(rng, 1, 1, h, radius=1.0)[0]
            items.append((f"translate-{i}", weyl_translate(X0, rep), None))
        else:
            F = TrigSymbol.random(1, rng, 1, cfg.corpus.max_freq)
            G = TrigSymbol.random(1, rng, 1, cfg.corpus.max_freq)
            items.append((f"product-{i}", weyl_quantize(F, rep) @ weyl_quantize(G, rep), None))
    return items


def suite_beals(cfg: ExperimentConfig) -> list:
    out = []
    h = float(cfg.h[0])
    rep = GaussianRep(1, cfg.work_N(1), h)
    big = GaussianRep(1, rep.N + 10, h)
    small = GaussianRep(1, cfg.n_requant, h)
    grid = _grid41(h)
    A = geometric_form(1, cfg.form.ratio, cfg.form.scale)
    tol_grid = cfg.tol("round_trip", 1e-3)
    tol_q = cfg.tol("requantize", 1e-4)
    for name, M, F in _beals_corpus(cfg, rep):
        Frec = reconstruct_symbol(M, A, rep)
        vals = Frec(grid)
        if F is not None:
            out.append(Check(f"{name}-grid", "round-trip", float(np.max(np.abs(vals - F(grid)))), tol_grid,
                             params={"h": h, "N": rep.N}))
        Mq = weyl_quantize(Frec, small)
        dist = float(np.linalg.norm(small.safe_block(Mq - compress(M, rep, small), cfg.margin), 2))
        out.append(Check(f"{name}-requantize", "requantize", dist, tol_q, kind="le" if F is None else "info",
                         params={"N_q": small.N}))
        probes = grid[::8]
        out.append(Check(f"{name}-heat", "heat", heat_check(Frec, M, rep, probes), cfg.tol("heat", 1e-4),
                         params={"probes": len(probes)}))
        # two-level consistency N vs N + 10 for operators with a symbol to requantize at the larger level
        Mbig = _rebuild(name, F, M, rep, big)
        if Mbig is not None:
            Fbig = reconstruct_symbol(Mbig, A, big)
            out.append(Check(f"{name}-levels", "levels", float(np.max(np.abs(Fbig(probes) - Frec(probes)))),
                             cfg.tol("levels", 1e-4), params={"N": rep.N, "N_big": big.N}))
        prof = beals_seminorm_estimate(M, rep, A, 4, probes=6, rng=np.random.default_rng(cfg.seed))
        norm_f = float(np.max(np.abs(vals)))
        C = prof.cumulative(4)
        ratio = norm_f / C if C > 0 else 0.0
        K = empirical_K(ratio, A, h)
        out.append(Check(f"{name}-bound", "reconstruction-bound", norm_f, C * reconstruction_bound_factor(A, h, K),
                         kind="info", params={"empirical_K": K, "C4": C}))
    return out


def _rebuild(name: str, F, M: np.ndarray, rep: GaussianRep, big: GaussianRep):
    if F is not None:
        if isinstance(F, ConstantSymbol):
            return F.value * np.eye(big.size)
        return weyl_quantize(F, big)
    return None


def _moyal_trig(F: TrigSymbol, G: TrigSymbol, h: float):
    """Exact Weyl symbol of Op(F) Op(G) for exponential sums: e^{ia.Z} # e^{ib.Z} = e^{i(a+b).Z + i h sigma(a, b)/2}."""
    cs, fs = [], []
    for c1, a in zip(F.coeffs, F.freqs):
        for c2, b in zip(G.coeffs, G.freqs):
            d = a.size // 2
            sab = -a[:d] @ b[d:] + a[d:] @ b[:d]
            cs.append(c1 * c2 * np.exp(0.5j * h * sab))
            fs.append(a + b)
    return ExpSymbol(np.array(cs), np.array(fs))


def suite_compose(cfg: ExperimentConfig) -> list:
    out = []
    h = float(cfg.h[0])
    rep = GaussianRep(1, cfg.work_N(1), h)
    small = GaussianRep(1, cfg.n_requant, h)
    A = geometric_form(1, cfg.form.ratio, cfg.form.scale)
    grid = _grid41(h)
    slack = cfg.tol("profile_slack", 0.05)
    m = 2
    for i, rng in enumerate(item_rngs(cfg.seed, cfg.corpus.count)):
        F = TrigSymbol.random(1, rng, cfg.corpus.max_terms, cfg.corpus.max_freq)
        G = TrigSymbol.random(1, rng, cfg.corpus.max_terms, cfg.corpus.max_freq)
        K = compose_symbols(F, G, A, rep)
        MF, MG = weyl_quantize(F, rep), weyl_quantize(G, rep)
        P = product_matrix(F, G, rep)
        Mq = weyl_quantize(K, small)
        dist = float(np.linalg.norm(small.safe_block(Mq - compress(P, rep, small), cfg.margin), 2))
        out.append(Check(f"compose-{i:02d}", "compose", dist, cfg.tol("compose", 1e-3), params={"N_q": small.N}))
        moyal = _moyal_trig(F, G, h)
        out.append(Check(f"moyal-{i:02d}", "moyal", float(np.max(np.abs(K(grid) - moyal(grid)))),
                         cfg.tol("round_trip", 1e-3)))
        pool = direction_pool(A, np.random.default_rng([cfg.seed, i]), n_random=8)
        pF = beals_seminorm_estimate(MF, rep, A, m, probes=8, rng=np.random.default_rng([cfg.seed, i, 1]), pool=pool)
        pG = beals_seminorm_estimate(MG, rep, A, m, probes=8, rng=np.random.default_rng([cfg.seed, i, 2]), pool=pool)
        pP = beals_seminorm_estimate(P, rep, A.scaled(4.0), m, probes=8, rng=np.random.default_rng([cfg.seed, i, 3]),
                                     pool=pool / 2)
        lhs = pP.cumulative(m)
        rhs = pF.cumulative(m) * pG.cumulative(m)
        out.append(Check(f"profile-{i:02d}", "composition-profile", lhs, rhs * (1 + slack),
                         params={"product": list(pP.constants), "F": list(pF.constants), "G": list(pG.constants)}))
    return out


# stochastic extension


def suite_stochastic(cfg: ExperimentConfig) -> list:
    """L^2 distance between f o pi_E and f against the estimate, for three ladders of subspaces."""
    out = []
    D = 2 * max(int(x) for x in cfg.d)
    h = float(cfg.h[0])
    rng0 = np.random.default_rng(np.random.SeedSequence([cfg.seed, 7]))
    lam = 0.5 ** np.arange(D)
    q, r = np.linalg.qr(rng0.standard_normal((D, D)))
    q = q * np.sign(np.diag(r))
    A = QuadraticForm(q @ np.diag(lam) @ q.T)
    a = rng0.standard_normal(D)
    # f is evaluated on points in R^D, seen as phase space of dimension D/2
    lin = LinearSymbol(a)
    trig = TrigSymbol([0.8, -0.5], np.vstack([rng0.standard_normal(D), rng0.standard_normal(D)]), [0.2, 1.1])
    fns = {"linear": lin, "trig": trig}
    sizes = [D // 4, D // 2, 3 * D // 4]
    qr2, _ = np.linalg.qr(rng0.standard_normal((D, D)))
    ladders = {
        "coordinate": coordinate_ladder(D, sizes),
        "eigen": [A.eigenvectors[:, np.argsort(-A.eigenvalues)][:, :k] for k in sizes],
        "random": [qr2[:, :k] for k in sizes],
    }
    full = np.eye(D)
    rngs = item_rngs(cfg.seed, len(fns) * len(ladders) * (len(sizes) + 1))
    j = 0
    for fname, f in fns.items():
        # order-1 seminorm: exact for linear f, the trigonometric upper bound otherwise
        if isinstance(f, TrigSymbol):
            semi = trig_seminorm_upper(f, 1, A)
        else:
            semi = float(np.sqrt(a @ np.linalg.pinv(A.matrix) @ a))
        for lname, frames in ladders.items():
            pairs = [(E, full) for E in frames] + [(frames[0], frames[1])]
            for k, (Es, El) in enumerate(pairs):
                plan = StochasticSamplePlan(Es, El, samples=cfg.samples, p=2.0, h=h)
                rep = stochastic_cauchy_check(f, plan, A, semi, rngs[j])
                j += 1
                out.append(Check(f"{fname}-{lname}-{k}", "stochastic", rep.ci_low, rep.bound,
                                 params={"estimate": rep.estimate, "ci_high": rep.ci_high, "dim_small": Es.shape[1],
                                         "dim_large": El.shape[1], "seminorm": semi}))
    return out


# QED


def _qed_system(cfg: ExperimentConfig, h: float):
    sc = cfg.qed
    modes = ModeSet(np.array(sc.modes, dtype=float), np.array(sc.weights, dtype=float), sc.cutoff, sc.infrared)
    reg = SpinRegister(np.array(sc.positions, dtype=float), np.array(sc.beta, dtype=float))
    return hamiltonian(reg, modes, sc.n_max, h, ceiling=sc.ceiling), reg, modes


def suite_qed(cfg: ExperimentConfig) -> list:
    out = []
    sc = cfg.qed
    slack = cfg.tol("qed_slack", 0.05)
    for h in [float(x) for x in cfg.h]:
        system, reg, modes = _qed_system(cfg, h)
        out.append(Check(f"hermitian-h{h}", "hamiltonian", system.hermiticity_defect(), 1e-12, params={"h": h}))
        Q0 = qt_form(0.0, reg, modes)
        out.append(Check(f"q0-h{h}", "qt", float(np.abs(Q0.matrix).max()), 0.0, params={"h": h}))
        rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, int(round(1e6 * h))]))
        for t in [float(x) for x in sc.times]:
            p = {"h": h, "t": t}
            Qt = qt_form(t, reg, modes)
            out.append(Check(f"qt-psd-h{h}-t{t}", "qt", -float(np.linalg.eigvalsh(Qt.matrix).min()), 1e-10, params=p))
            ref = float(np.trace(qt_riemann(t, reg, modes)))
            out.append(Check(f"qt-trace-h{h}-t{t}", "qt", abs(Qt.trace - ref), 1e-6, params=p))
            ph = observable_evolution("photon_number", t, system, Qt=Qt)
            out.append(Check(f"photon-identity-h{h}-t{t}", "photon-identity", ph.residual, 1e-6,
                             params={**p, "residual": ph.residual}))
            out.append(Check(f"photon-remainder-h{h}-t{t}", "photon-remainder", ph.measured, ph.bound * (1 + slack),
                             params={**p, "full_norm": ph.extras["full_norm"]}))
            worst = 0.0
            for _ in range(sc.n_directions):
                V = rng.standard_normal(2 * modes.d)
                lhs, rhs = commutator_bound_check(system, V, t)
                worst = max(worst, lhs / rhs if rhs > 0 else (0.0 if lhs < 1e-14 else np.inf))
            out.append(Check(f"commutator-h{h}-t{t}", "commutator", worst, 1 + slack, params=p))
            for kind in ("magnetic", "electric"):
                for j in (1, 2, 3):
                    r = observable_evolution(kind, t, system, j=j, x=reg.positions[0], Qt=Qt)
                    out.append(Check(f"{kind}{j}-h{h}-t{t}", kind, r.measured, r.bound * (1 + slack),
                                     params={**p, "full_norm": r.extras["full_norm"]}))
            for lam in range(1, reg.n + 1):
                for j in (1, 2, 3):
                    r = observable_evolution("spin", t, system, j=j, lam=lam)
                    out.append(Check(f"spin{j}-{lam}-h{h}-t{t}", "spin", abs(r.measured - 1.0), 1e-10, params=p))
            out.append(Check(f"propagator-h{h}-t{t}", "propagator", system.derivative_residual(t), 1e-6, params=p))
            prof = reduced_beals_profile(system, t, Qt)
            out.append(Check(f"reduced-profile-h{h}-t{t}", "reduced-profile", max(prof, default=0.0), 1 + slack,
                             kind="info", params=p))
    return out


# dimension scaling


def _embed_first_pair(F1: TrigSymbol, d: int) -> TrigSymbol:
    freqs = np.zeros((len(F1.amps), 2 * d))
    freqs[:, 0] = F1.trig_freqs[:, 0]
    freqs[:, d] = F1.trig_freqs[:, 1]
    return TrigSymbol(F1.amps, freqs, F1.phases)


def suite_dim_scaling(cfg: ExperimentConfig) -> list:
    """lambda_j = 4^{-j} on x_j and xi_j, a fixed trigonometric symbol on (x_1, xi_1), d = 1..d_max.

    Op(F) = Op_1(F_1) (x) I, and compressing to total degree <= K leaves the
    norm of Op_1(F_1) on degrees <= K (every block is a compression of that
    one), so the measured norm is taken in one mode. The full d = 2
    quantization at a small truncation checks this reduction.
    """
    out = []
    h = float(cfg.h[0])
    N = cfg.work_N(1)
    F1 = TrigSymbol([1.0, 0.5], [[1.0, 0.5], [-0.4, 0.9]], [0.0, 0.7])
    rep1 = GaussianRep(1, N, h)
    measured = weyl_norm(weyl_quantize(F1, rep1), rep1, cfg.margin)
    rows = []
    for d in range(1, cfg.d_max + 1):
        lam = 4.0 ** -np.arange(1, d + 1)
        A = QuadraticForm.diagonal(np.concatenate([lam, lam]))
        F = _embed_first_pair(F1, d)
        factor = cv_bound_factor(A, h)
        semi = symbol_norm(F, 4 * d, A, rng=np.random.default_rng(cfg.seed))
        rows.append((d, factor))
        out.append(Check(f"cv-d{d}", "cv-bound", measured, semi * factor,
                         params={"d": d, "factor": factor, "seminorm": semi}))
    small = 16
    r1, r2 = GaussianRep(1, small, h), GaussianRep(2, small, h)
    n1 = weyl_norm(weyl_quantize(F1, r1), r1, cfg.margin)
    n2 = weyl_norm(weyl_quantize(_embed_first_pair(F1, 2), r2), r2, cfg.margin)
    out.append(Check("reduction-d2", "reduction", abs(n1 - n2), 1e-10, params={"d": 2, "N": small}))
    f8 = rows[-1][1]
    for d, factor in rows:
        out.append(Check(f"norm-d{d}", "norm", measured, measured + 1e-6, params={"d": d}))
        out.append(Check(f"factor-d{d}", "factor", factor, f8 + 1e-6, params={"d": d}))
    for (_, f0), (d1, f1) in zip(rows, rows[1:]):
        out.append(Check(f"monotone-d{d1}", "monotone", f0, f1 + 1e-12, params={"d": d1}))
    return out


SUITE_FUNCS = {
    "cv-bound": suite_cv_bound,
    "wick-heat": suite_wick_heat,
    "covariance": suite_covariance,
    "beals": suite_beals,
    "compose": suite_compose,
    "stochastic": suite_stochastic,
    "qed": suite_qed,
    "dim-scaling": suite_dim_scaling,
}


def run_suite(cfg: ExperimentConfig) -> RunRecord:
    start = time.perf_counter()
    checks = SUITE_FUNCS[cfg.suite](cfg)
    return RunRecord(cfg.suite, cfg.digest(), checks, cfg.seed, time.perf_counter() - start)
