"""Check batteries: each check returns a one-line verdict.

Scopes group the checks by module: ``norms``, ``construct``, ``complexity``,
``bounds``, ``train`` and ``all``. The acceptance test suite calls the same
functions.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from pathnorm.bounds import (
    apost_gen,
    apost_rhs,
    apriori_gen,
    apriori_rhs,
    framework_compare,
    noise_gap_rhs,
    psi_l1_path,
    psi_weighted_path,
)
from pathnorm.complexity import (
    rademacher_bounds,
    rademacher_finite_exact,
    rademacher_linear_exact,
    rademacher_lower_estimate,
)
from pathnorm.construct import (
    TwoLayerRep,
    build_fc,
    build_resnet,
    normalize_two_layer,
    subsample_two_layer,
    two_layer_eval,
)
from pathnorm.experiment import loglog_slope, parse_config, run_experiment
from pathnorm.netcore import (
    ResNetArch,
    ResNetParams,
    fc_forward,
    loss_from_output,
    resnet_forward,
)
from pathnorm.norms import (
    l1_path_norm,
    neuron_path_norms,
    norm_21,
    path_count,
    path_norm_by_enumeration,
    spectral_complexity,
    spectral_norm,
    variational_masses,
    variational_norm,
    weighted_path_norm,
)
from pathnorm.targets import NoiseModel, barron_norm_upper, mixture_eval, random_mixture, uniform_inputs
from pathnorm.train import gradient, regularized_objective, thresholds


@dataclass
class Check:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.detail} [{self.seconds:.1f}s]"


def _timed(fn: Callable[[], tuple[bool, str]], name: str) -> Check:
    t0 = time.perf_counter()
    ok, detail = fn()
    return Check(name, bool(ok), detail, time.perf_counter() - t0)


def rel_err(a, b) -> float:
    a, b = float(a), float(b)
    scale = max(abs(a), abs(b))
    return 0.0 if scale == 0.0 else abs(a - b) / scale


# --- norms --------------------------------------------------------------------


def random_resnet(rng: np.random.Generator, max_d=5, max_D=6, max_L=4, max_m=4, max_paths=None) -> ResNetParams:
    """Random small resnet; with ``max_paths`` sizes are redrawn until enumeration is feasible."""
    while True:
        arch = ResNetArch(
            int(rng.integers(1, max_d + 1)),
            int(rng.integers(1, max_D + 1)),
            int(rng.integers(1, max_m + 1)),
            int(rng.integers(1, max_L + 1)),
        )
        params = ResNetParams.random(arch, rng, 1.0)
        if max_paths is None or path_count(params) <= max_paths:
            return params


def f_decomposition(params: ResNetParams) -> float:
    """Right-hand side of the output decomposition over neuron path norms."""
    G = neuron_path_norms(params)
    au = np.abs(params.u)
    total = float(np.abs(au @ np.abs(params.V)).sum())
    for l in range(params.arch.L):
        total += float((au @ np.abs(params.U[l])) @ G[l])
    return total


def g_decomposition(params: ResNetParams) -> np.ndarray:
    """Neuron path norms rebuilt from earlier neurons only."""
    G = neuron_path_norms(params)
    out = np.empty_like(G)
    aV = np.abs(params.V)
    for l in range(params.arch.L):
        aW = np.abs(params.W[l])
        val = 3.0 * (aW @ aV).sum(axis=1)
        for k in range(l):
            val = val + 3.0 * (aW @ np.abs(params.U[k])) @ G[k]
        out[l] = val
    return out


def check_norm_identities(n_nets: int = 200, seed: int = 0, tol: float = 1e-9) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_nets):
        p = random_resnet(rng, max_paths=2 * 10**6)
        P = weighted_path_norm(p)
        worst = max(worst, rel_err(P, path_norm_by_enumeration(p)))
        worst = max(worst, rel_err(P, f_decomposition(p)))
        G = neuron_path_norms(p)
        Gd = g_decomposition(p)
        worst = max(worst, float(np.max(np.abs(G - Gd) / np.maximum(np.abs(G), 1e-300))))
    return worst <= tol, f"{n_nets} nets, max relative error {worst:.2e} (tol {tol:g})"


def _hand_net() -> ResNetParams:
    arch = ResNetArch(2, 2, 1, 1)
    return ResNetParams(arch, np.eye(2), np.ones((1, 1, 2)), np.ones((1, 2, 1)), np.ones(2))


def check_norm_examples() -> tuple[bool, str]:
    p = _hand_net()
    vals = (weighted_path_norm(p), path_norm_by_enumeration(p), l1_path_norm(p), neuron_path_norms(p)[0, 0])
    ok = np.allclose(vals, (14.0, 14.0, 6.0, 6.0), rtol=0, atol=1e-12)
    f = resnet_forward(p, np.array([1.0, 0.5]))
    ok = ok and abs(f - 4.5) < 1e-12
    return ok, f"weighted {vals[0]:g}, enumerated {vals[1]:g}, l1 {vals[2]:g}, neuron {vals[3]:g}, f {f:g}"


def check_homogeneity_monotonicity(n_nets: int = 50, seed: int = 1) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    ok = True
    for _ in range(n_nets):
        p = random_resnet(rng)
        c = float(rng.uniform(0.1, 5.0))
        q = p.replace(u=c * p.u)
        ok &= rel_err(weighted_path_norm(q), c * weighted_path_norm(p)) < 1e-12
        ok &= rel_err(l1_path_norm(q), c * l1_path_norm(p)) < 1e-12
        ok &= l1_path_norm(p) <= weighted_path_norm(p)
        W = p.W.copy()
        idx = tuple(int(rng.integers(0, s)) for s in W.shape)
        W[idx] = np.sign(W[idx] or 1.0) * (abs(W[idx]) + rng.uniform(0, 1))
        ok &= weighted_path_norm(p.replace(W=W)) >= weighted_path_norm(p) * (1 - 1e-14)
    return ok, f"{n_nets} nets: u-scaling, l1 <= weighted, entrywise monotonicity"


# --- construct ----------------------------------------------------------------


def random_rep(rng: np.random.Generator, M: int, d: int) -> TwoLayerRep:
    return TwoLayerRep(rng.uniform(-1.0, 1.0, M), rng.uniform(-1.0, 1.0, (M, d)))


def check_construction(n_reps: int = 10, n_points: int = 1000, seed: int = 0) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    worst_f = worst_n = 0.0
    norm_ok = True
    for _ in range(n_reps):
        d = int(rng.integers(2, 6))
        M = int(rng.integers(1, 9))
        rep = random_rep(rng, M, d)
        X = uniform_inputs(rng, n_points, d)
        ref = two_layer_eval(rep, X)
        L = int(rng.integers(1, 4))
        m = -(-M // L)
        net = build_resnet(rep, L, m)
        worst_f = max(worst_f, float(np.max(np.abs(resnet_forward(net, X) - ref))))
        worst_n = max(worst_n, rel_err(weighted_path_norm(net), 3.0 * rep.path_mass()))
        nrep = normalize_two_layer(rep)
        worst_f = max(worst_f, float(np.max(np.abs(two_layer_eval(nrep, X) - ref))))
        target = random_mixture(M, d, 1.0, rng)
        trep = normalize_two_layer(TwoLayerRep.from_mixture(target))
        norm_ok &= weighted_path_norm(build_resnet(trep, L, m)) <= 12.0 * barron_norm_upper(target) * (1 + 1e-12)
        Lf = int(rng.integers(2, 5))
        mf = d + 2 + M
        fc = build_fc(nrep, Lf, mf)
        worst_f = max(worst_f, float(np.max(np.abs(fc_forward(fc, X) - ref))))
    ok = worst_f <= 1e-12 and worst_n <= 1e-12 and norm_ok
    return ok, f"max |f - rep| {worst_f:.1e}, norm relative error {worst_n:.1e}, 12b certificate {'ok' if norm_ok else 'violated'}"


def check_approximation_rate(K: int = 50, d: int = 5, Ms=(5, 10, 25, 50), n_seeds: int = 100, n_points: int = 2000, seed: int = 0):
    target = random_mixture(K, d, 1.0, seed)
    b = barron_norm_upper(target)
    X = uniform_inputs(np.random.default_rng(seed + 1), n_points, d)
    ref = mixture_eval(target, X)
    parts = []
    ok = True
    for M in Ms:
        errs = np.array(
            [np.mean((two_layer_eval(subsample_two_layer(target, M, s, exact_if_fits=True), X) - ref) ** 2) for s in range(n_seeds)]
        )
        mean, se = float(errs.mean()), float(errs.std(ddof=1) / math.sqrt(n_seeds))
        bound = 16.0 * b * b / M
        ok &= mean <= bound + 3 * se
        if M >= K:
            ok &= mean == 0.0
        parts.append(f"M={M}: {mean:.3g} <= {bound:.3g}")
    return ok, "; ".join(parts)


def check_fc_certificates(n_reps: int = 10, seed: int = 0) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    worst = {"prod": 0.0, "21": 0.0, "spectral": 0.0, "var": 0.0, "mass": 0.0}
    for _ in range(n_reps):
        d = int(rng.integers(2, 5))
        L = int(rng.integers(2, 6))
        m = d + int(rng.integers(3, 8))
        M = int(rng.integers(1, 4))
        target = random_mixture(M, d, 1.0, rng)
        b = barron_norm_upper(target)
        fc = build_fc(normalize_two_layer(TwoLayerRep.from_mixture(target)), L, m)
        sig = [spectral_norm(w, seed=l)[0] for l, w in enumerate(fc.W)]
        worst["prod"] = max(worst["prod"], float(np.prod(sig[:-1])) / math.e)
        worst["21"] = max(worst["21"], max(norm_21(w.T) for w in fc.W) / (math.sqrt(2) * m))
        worst["spectral"] = max(worst["spectral"], spectral_complexity(fc) / (16.0 * (L * m) ** 1.5 * b))
        worst["var"] = max(worst["var"], variational_norm(fc) / (4.0 * math.sqrt(m) * b))
        V, layers = variational_masses(fc)
        for vin, vout in layers:
            worst["mass"] = max(worst["mass"], rel_err(float(vin @ vout), V))
    ok = worst["prod"] < 1 and worst["21"] < 1 and worst["spectral"] <= 1 and worst["var"] <= 1 and worst["mass"] <= 1e-10
    return ok, (
        f"max prod||W||/e {worst['prod']:.3f}, ||W^T||_21/(sqrt2 m) {worst['21']:.3f}, "
        f"spectral/cert {worst['spectral']:.3f}, variational/cert {worst['var']:.3f}, mass identity {worst['mass']:.1e}"
    )


# --- complexity ---------------------------------------------------------------


def check_linear_oracle(n_sets: int = 500, seed: int = 0) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_sets):
        n = int(rng.integers(1, 13))
        d = int(rng.integers(1, 6))
        X = rng.uniform(-1.0, 1.0, (n, d))
        exact = rademacher_linear_exact(X)
        bound = rademacher_bounds("linear", 1.0, d, n, float(np.abs(X).max()))
        worst = max(worst, exact / bound)
    return worst <= 1.0, f"{n_sets} point sets, max exact/bound {worst:.3f}"


def check_contraction(n_trials: int = 100, seed: int = 0) -> tuple[bool, str]:
    """1-Lipschitz maps applied coordinatewise never increase a finite class's complexity."""
    rng = np.random.default_rng(seed)
    maps = [np.abs, np.tanh, np.sin, lambda v: np.maximum(v, 0.0), lambda v: np.clip(v, -0.3, 0.5)]
    worst = -np.inf
    for _ in range(n_trials):
        n = int(rng.integers(1, 13))
        F = rng.normal(size=(int(rng.integers(1, 8)), n))
        phis = [maps[int(k)] for k in rng.integers(0, len(maps), n)]
        G = np.stack([phi(F[:, i]) for i, phi in enumerate(phis)], axis=1)
        worst = max(worst, rademacher_finite_exact(G) - rademacher_finite_exact(F))
    return worst <= 1e-12, f"{n_trials} dictionaries, max increase {worst:.1e}"


RADEMACHER_GRID = [
    (Q, d, n, L, m)
    for Q in (1.0, 2.0)
    for d in (2, 5)
    for n, L, m in ((10, 2, 4), (20, 4, 4), (16, 8, 3))
]


def _rad_points(d: int, n: int, seed: int) -> np.ndarray:
    return uniform_inputs(np.random.default_rng(seed), n, d)


def rademacher_rows(grid=RADEMACHER_GRID, seed: int = 0, **kw) -> list[dict]:
    rows = []
    for i, (Q, d, n, L, m) in enumerate(grid):
        X = _rad_points(d, n, seed + i)
        est, se = rademacher_lower_estimate(X, Q, ResNetArch(d, d + 1, m, L), seed=seed + i, **kw)
        rows.append(dict(Q=Q, d=d, n=n, L=L, m=m, estimate=est, se=se, bound=rademacher_bounds("resnet", Q, d, n)))
    return rows


def check_rademacher_upper(seed: int = 0, **kw) -> tuple[bool, str]:
    rows = rademacher_rows(seed=seed, **kw)
    worst = max((r["estimate"] - 3 * r["se"]) / r["bound"] for r in rows)
    return worst <= 1.0, f"{len(rows)} grid points, max (estimate - 3SE)/bound {worst:.3f}"


def check_rademacher_depth(Q: float = 1.0, d: int = 3, n: int = 12, m: int = 4, seed: int = 0, **kw) -> tuple[bool, str]:
    X = _rad_points(d, n, seed)
    e2, _ = rademacher_lower_estimate(X, Q, ResNetArch(d, d + 1, m, 2), seed=seed, **kw)
    e8, _ = rademacher_lower_estimate(X, Q, ResNetArch(d, d + 1, m, 8), seed=seed, **kw)
    ratio = e2 / e8
    return 0.5 <= ratio <= 1.5, f"L=2 {e2:.4f}, L=8 {e8:.4f}, ratio {ratio:.3f}"


def check_rademacher_linear_match(Q: float = 2.0, d: int = 3, n: int = 10, seed: int = 0, **kw) -> tuple[bool, str]:
    X = _rad_points(d, n, seed)
    exact = Q * rademacher_linear_exact(X)
    est, se = rademacher_lower_estimate(X, Q, ResNetArch(d, d + 1, 2, 2), seed=seed, linear_only=True, **kw)
    return abs(est - exact) <= 3 * se, f"linear sub-class {est:.4f} +- {se:.4f} vs exact {exact:.4f}"


# --- bounds -------------------------------------------------------------------


def check_bound_examples() -> tuple[bool, str]:
    lam2 = thresholds(2)[0]
    vals = {
        "lambda_min(2)": (lam2, 4.400374, 1e-6),
        "lambda_min(5)": (thresholds(5)[0], 4.310660, 1e-6),
        "B_min": (thresholds(2, sigma=0.5, n=100)[1], 2.072983, 1e-6),
        "apriori": (apriori_rhs(1, 2, 2, 2, 100, lam2, 0.1), 62.40915, 1e-5),
        "apost": (apost_rhs(0, 2, 100, 0.1), 2.781123, 1e-6),
        "noise_gap": (noise_gap_rhs(2, 0.5, 100), 0.4, 1e-12),
        "rad_resnet": (rademacher_bounds("resnet", 1, 2, 100), 0.499533, 1e-5),
        "rad_linear": (rademacher_bounds("linear", 1, 2, 2), 1.177410, 1e-6),
    }
    bad = [k for k, (got, want, tol) in vals.items() if rel_err(got, want) > tol]
    return not bad, "all worked values reproduced" if not bad else f"mismatch: {', '.join(bad)}"


def check_table_ratios() -> tuple[bool, str]:
    ok = True
    worst = 0.0
    for L in range(2, 12):
        ok &= psi_l1_path(L + 1, 8) / psi_l1_path(L, 8) == 2.0
    ref = framework_compare(2, 6, 5, 100, 1.0)["weighted_path"].estimation
    for L, m in ((3, 7), (8, 40), (20, 100)):
        ok &= framework_compare(L, m, 5, 100, 1.0)["weighted_path"].estimation == ref
    for (L1, m1), (L2, m2) in (((2, 8), (4, 16)), ((3, 6), (9, 12))):
        a = framework_compare(L1, m1, 5, 100, 1.0)
        b = framework_compare(L2, m2, 5, 100, 1.0)
        for name, (eL, em) in (("spectral", (1.5, 1.5)), ("variational", (1.0, 0.5))):
            x, y = a[name], b[name]
            ok &= rel_err(x.power_part * x.log_part, x.norm_tilde * x.psi) < 1e-12
            want = (L2 / L1) ** eL * (m2 / m1) ** em
            worst = max(worst, rel_err(y.power_part / x.power_part, want))
    # sqrt((L-2) log m + log 8ed) contributes the remaining sqrt(L)
    f = lambda L: math.sqrt((L - 2) * math.log(8) + math.log(8 * math.e * 5))
    tail = math.log(f(2e6) / f(1e6)) / math.log(2.0)
    ok &= worst <= 1e-10 and abs(tail - 0.5) < 1e-5
    return ok, f"l1 ratio 2 exact, weighted term constant, power-law ratio error {worst:.1e}, variational log bracket exponent {tail:.6f}"


def check_generic_consistency(n_cases: int = 50, seed: int = 0) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_cases):
        d, n = int(rng.integers(2, 20)), int(rng.integers(10, 10**5))
        P, delta = float(rng.uniform(0, 50)), float(rng.uniform(0.01, 0.99))
        b, L, m = float(rng.uniform(0.1, 5)), int(rng.integers(1, 10)), int(rng.integers(1, 50))
        psi = psi_weighted_path(d)
        worst = max(worst, rel_err(apost_gen(P, psi, n, delta), apost_rhs(P, d, n, delta)))
        lam = thresholds(d)[0] + float(rng.uniform(0, 3))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            direct = apriori_rhs(b, L, m, d, n, lam, delta)
        worst = max(worst, rel_err(apriori_gen(16 * b * b / (L * m), 12 * b, psi, n, delta, lam), direct))
    return worst <= 1e-12, f"{n_cases} cases, max relative difference {worst:.1e}"


def check_noise_truncation(n_nets: int = 5, n_mc: int = 10**6, seed: int = 0) -> tuple[bool, str]:
    sigma, B, n = 0.5, 2.072983, 100
    bound = noise_gap_rhs(2.0, sigma, n)
    target = random_mixture(10, 3, 1.0, seed, rescale=True)
    rng = np.random.default_rng(seed)
    worst = -np.inf
    for k in range(n_nets):
        p = ResNetParams.random(ResNetArch(3, 4, 4, 2), rng, 0.5)
        X = uniform_inputs(rng, n_mc, 3)
        y = mixture_eval(target, X) + NoiseModel.gaussian(sigma).draw(rng, n_mc)
        f = resnet_forward(p, X)
        diff = loss_from_output(f, y) - loss_from_output(f, y, B)
        mean, se = float(diff.mean()), float(diff.std(ddof=1) / math.sqrt(n_mc))
        worst = max(worst, mean - 3 * se - bound)
    return worst <= 0.0, f"max (|L - L_B| - 3SE) - {bound:g} = {worst:.3f} over {n_nets} nets"


# --- train --------------------------------------------------------------------


def fd_check_point(rng: np.random.Generator, h: float = 1e-6, guard: float = 1e-4, rtol: float = 1e-5, atol: float = 1e-8):
    """One random smooth point: returns max normalized error ``|g - fd| / (rtol |fd| + atol)``."""
    from pathnorm.netcore import Dataset

    arch = ResNetArch(3, 4, 3, 2)
    while True:
        p = ResNetParams.random(arch, rng, 0.6)
        X = uniform_inputs(rng, 6, arch.d)
        f, tr = resnet_forward(p, X, want_trace=True)
        y = rng.uniform(0, 1, 6)
        smooth = (
            np.all(np.abs(p.flat()) > guard)
            and all(np.all(np.abs(z) > guard) for z in tr.preact)
            and np.all(np.abs(f) > guard)
            and np.all(np.abs(f - 1.0) > guard)
        )
        if smooth:
            break
    data = Dataset(X, y)
    lam = float(rng.uniform(0.1, 2.0))
    g = gradient(p, data, lam).flat()
    v = p.flat()
    fd = np.empty_like(v)
    for i in range(v.size):
        e = np.zeros_like(v)
        e[i] = h
        fd[i] = (
            regularized_objective(ResNetParams.from_flat(arch, v + e), data, lam)
            - regularized_objective(ResNetParams.from_flat(arch, v - e), data, lam)
        ) / (2 * h)
    return float(np.max(np.abs(g - fd) / (rtol * np.abs(fd) + atol)))


def check_gradient(n_points: int = 100, seed: int = 0) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    worst = max(fd_check_point(rng) for _ in range(n_points))
    return worst <= 1.0, f"{n_points} points, max error / (1e-5 |fd| + 1e-8) = {worst:.3f}"


def apost_config(n_runs: int = 10, seed: int = 0) -> dict:
    return {
        "target": {"d": 5, "K": 20, "seed": seed, "rescale": True},
        "n": 200, "L": 4, "m": 8, "lam": thresholds(5)[0], "delta": 0.1,
        "n_mc": 20_000, "seed": seed, "repeats": n_runs,
        "train": {"epochs": 100, "step_size": 0.05},
    }


def check_apost_end_to_end(n_runs: int = 10, seed: int = 0) -> tuple[bool, str]:
    rows, _ = run_experiment(parse_config(apost_config(n_runs, seed)))
    errors = [r["error"] for r in rows if r["error"]]
    passes = sum(bool(r.get("apost_pass")) for r in rows)
    gaps = [r["gap"] for r in rows if not r["error"]]
    rhs = [r["apost_rhs"] for r in rows if not r["error"]]
    ok = not errors and passes >= math.ceil(0.9 * n_runs)
    return ok, f"{passes}/{n_runs} runs with gap <= rhs (max gap {max(gaps, default=float('nan')):.4f}, min rhs {min(rhs, default=float('nan')):.3f})"


def gap_scaling_config(repeats: int = 20, seed: int = 0) -> dict:
    return {
        "target": {"d": 5, "K": 20, "seed": seed, "rescale": True},
        "L": 4, "m": 8, "lam": "min", "delta": 0.1, "n_mc": 200_000,
        "seed": seed, "repeats": repeats, "grid": {"n": [100, 400, 1600]},
        "train": {"epochs": 60, "step_size": 0.05},
    }


def check_gap_scaling(repeats: int = 20, seed: int = 0, jobs: int = 1) -> tuple[bool, str]:
    rows, _ = run_experiment(parse_config(gap_scaling_config(repeats, seed)), jobs=jobs)
    ns = sorted({r["n"] for r in rows})
    means = [float(np.mean([r["gap"] for r in rows if r["n"] == n and not r["error"]])) for n in ns]
    slope = loglog_slope(ns, means)
    detail = ", ".join(f"n={n}: {g:.4f}" for n, g in zip(ns, means))
    return -0.8 <= slope <= -0.2, f"mean gap {detail}; slope {slope:.3f}"


def check_training_progress(seed: int = 0) -> tuple[bool, str]:
    from pathnorm.targets import sample_dataset
    from pathnorm.train import TrainConfig, train

    target = random_mixture(20, 5, 1.0, seed, rescale=True)
    data = sample_dataset(target, 200, seed=seed)
    _, hist = train(TrainConfig(lam=thresholds(5)[0], epochs=50, seed=seed), data, ResNetArch(5, 6, 8, 4))
    drop = 1.0 - min(hist.objective) / hist.objective[0]
    return drop >= 0.5, f"objective {hist.objective[0]:.4f} -> {min(hist.objective):.4f} ({100 * drop:.0f}% reduction)"


# --- registry -----------------------------------------------------------------

SCOPES: dict[str, list[tuple[str, Callable[[], tuple[bool, str]]]]] = {
    "norms": [
        ("norm worked examples", check_norm_examples),
        ("enumeration and decomposition identities", check_norm_identities),
        ("homogeneity and monotonicity", check_homogeneity_monotonicity),
    ],
    "construct": [
        ("construction exactness", check_construction),
        ("subsampling rate", check_approximation_rate),
        ("fully-connected certificates", check_fc_certificates),
    ],
    "complexity": [
        ("linear class below its bound", check_linear_oracle),
        ("contraction on finite classes", check_contraction),
        ("linear sub-class matches enumeration", check_rademacher_linear_match),
        ("lower estimates below the resnet bound", check_rademacher_upper),
        ("depth independence", check_rademacher_depth),
    ],
    "bounds": [
        ("worked bound values", check_bound_examples),
        ("comparison table ratios", check_table_ratios),
        ("generic framework consistency", check_generic_consistency),
        ("noise truncation gap", check_noise_truncation),
    ],
    "train": [
        ("gradient vs finite differences", check_gradient),
        ("training reduces the objective", check_training_progress),
        ("a posteriori bound end to end", check_apost_end_to_end),
        ("gap scaling in n", check_gap_scaling),
    ],
}


def run_scope(scope: str, emit: Callable[[str], None] = print) -> list[Check]:
    names = list(SCOPES) if scope == "all" else [scope]
    if any(s not in SCOPES for s in names):
        raise KeyError(f"unknown scope {scope!r}; choose from {', '.join(list(SCOPES) + ['all'])}")
    checks = []
    for s in names:
        for label, fn in SCOPES[s]:
            c = _timed(fn, f"{s}/{label}")
            emit(c.line())
            checks.append(c)
    return checks
