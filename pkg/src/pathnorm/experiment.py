"""Grid experiments: sample a target, fit the regularized estimator, measure
train and Monte Carlo population risk, and compare against the bounds.
"""

from __future__ import annotations

import itertools
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from typing import Optional, Union

import numpy as np

from pathnorm import __version__
from pathnorm.bounds import apost_rhs, apriori_noisy_rhs, apriori_rhs
from pathnorm.construct import TwoLayerRep, build_resnet
from pathnorm.io import config_hash, csv_text
from pathnorm.netcore import DomainError, ResNetArch, ResNetParams, empirical_risk, population_risk_mc
from pathnorm.norms import weighted_path_norm
from pathnorm.targets import BarronMixture, NoiseModel, barron_norm_upper, random_mixture, sample_dataset
from pathnorm.train import TrainConfig, thresholds, train


class ConfigError(ValueError):
    pass


GRID_KEYS = ("n", "lam", "L", "m", "D", "sigma", "B", "epochs", "step_size")


@dataclass
class TargetSpec:
    d: int = 5
    K: int = 20
    seed: int = 0
    coef_scale: float = 1.0
    rescale: bool = True


@dataclass
class TrainSpec:
    step_size: float = 0.05
    batch_size: int = 32
    epochs: int = 100
    const_epochs: Optional[int] = None
    optimizer: str = "sgd"
    init_scale: Optional[float] = None


@dataclass
class ExperimentConfig:
    """Experiment description. ``lam`` and ``B`` accept ``"min"`` for the certified thresholds.

    ``grid`` maps any of :data:`GRID_KEYS` to a list of values; grid points are
    the cartesian product in key order, each repeated ``repeats`` times. Point
    ``i`` uses seed ``seed + i``.
    """

    target: TargetSpec = field(default_factory=TargetSpec)
    train: TrainSpec = field(default_factory=TrainSpec)
    n: int = 200
    L: int = 4
    m: int = 8
    D: Optional[int] = None
    lam: Union[float, str] = "min"
    B: Union[float, str, None] = None
    delta: float = 0.1
    sigma: float = 0.0
    n_mc: int = 20_000
    init: str = "random"
    seed: int = 0
    repeats: int = 1
    grid: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return asdict(self)


def _build(cls, obj, where: str):
    if not isinstance(obj, dict):
        raise ConfigError(f"{where} must be an object")
    names = {f.name for f in fields(cls)}
    unknown = sorted(set(obj) - names)
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(unknown)}")
    return cls(**obj)


def parse_config(obj: dict) -> ExperimentConfig:
    """Build a config from parsed JSON; unknown keys anywhere are errors."""
    obj = dict(obj)
    target = _build(TargetSpec, obj.pop("target", {}), "target")
    tr = _build(TrainSpec, obj.pop("train", {}), "train")
    cfg = _build(ExperimentConfig, obj, "config")
    cfg.target, cfg.train = target, tr
    bad = sorted(set(cfg.grid) - set(GRID_KEYS))
    if bad:
        raise ConfigError(f"unknown grid key(s): {', '.join(bad)}")
    for k, v in cfg.grid.items():
        if not isinstance(v, list) or not v:
            raise ConfigError(f"grid[{k!r}] must be a nonempty list")
    if cfg.init not in ("random", "construct"):
        raise ConfigError(f"init must be 'random' or 'construct', got {cfg.init!r}")
    if cfg.repeats < 1:
        raise ConfigError("repeats must be >= 1")
    return cfg


def grid_points(cfg: ExperimentConfig) -> list[dict]:
    base = {k: getattr(cfg, k) for k in ("n", "lam", "L", "m", "D", "sigma", "B")}
    base.update(epochs=cfg.train.epochs, step_size=cfg.train.step_size)
    keys = list(cfg.grid)
    points = []
    for combo in itertools.product(*(cfg.grid[k] for k in keys)):
        for rep in range(cfg.repeats):
            p = dict(base)
            p.update(zip(keys, combo))
            p["repeat"] = rep
            points.append(p)
    for i, p in enumerate(points):
        p["index"] = i
        p["seed"] = cfg.seed + i
    return points


def make_target(spec: TargetSpec) -> BarronMixture:
    return random_mixture(spec.K, spec.d, spec.coef_scale, spec.seed, rescale=spec.rescale)


CSV_COLUMNS = [
    "index", "seed", "repeat", "d", "K", "n", "L", "m", "D", "lam", "B", "sigma", "delta",
    "epochs", "step_size", "train_risk", "pop_risk", "pop_se", "pop_risk_B", "pop_se_B",
    "path_norm", "barron", "apost_rhs", "apriori_rhs", "gap", "apost_pass", "apriori_pass", "error",
]


@dataclass
class PreparedPoint:
    target: BarronMixture
    noise: NoiseModel
    data: object
    arch: ResNetArch
    train_config: TrainConfig
    init: Optional[ResNetParams]
    lam: float
    B: Optional[float]
    seeds: dict


def prepare_point(cfg: ExperimentConfig, point: dict) -> PreparedPoint:
    """Resolve thresholds and seeds, sample the data and assemble the training config."""
    d = cfg.target.d
    target = make_target(cfg.target)
    n, L, m = int(point["n"]), int(point["L"]), int(point["m"])
    D = int(point["D"]) if point["D"] is not None else d + 1
    sigma = float(point["sigma"])
    noise = NoiseModel.gaussian(sigma) if sigma > 0 else NoiseModel()
    B = point["B"]
    if B == "min":
        B = thresholds(d, tau=0.0, sigma=sigma, n=n)[1]
    lam = point["lam"]
    if lam == "min":
        lam = thresholds(d, B)[0]
    lam = float(lam)
    # independent streams for data, training and Monte Carlo
    s_data, s_train, s_mc = (int(s) for s in np.random.SeedSequence(int(point["seed"])).generate_state(3))
    data = sample_dataset(target, n, noise, s_data)
    arch = ResNetArch(d, D, m, L)
    init = None
    if cfg.init == "construct":
        init = _pad(build_resnet(TwoLayerRep.from_mixture(target), L, m), arch)
    tc = TrainConfig(
        lam=lam,
        B=B,
        step_size=float(point["step_size"]),
        batch_size=cfg.train.batch_size,
        epochs=int(point["epochs"]),
        seed=s_train,
        init_scale=cfg.train.init_scale,
        const_epochs=cfg.train.const_epochs,
        optimizer=cfg.train.optimizer,
    )
    seeds = {"point": int(point["seed"]), "data": s_data, "train": s_train, "mc": s_mc, "target": cfg.target.seed}
    return PreparedPoint(target, noise, data, arch, tc, init, lam, B, seeds)


def run_point(cfg: ExperimentConfig, point: dict) -> dict:
    """Run one grid point; errors are caught and reported in the ``error`` column."""
    d = cfg.target.d
    row = {k: point.get(k) for k in ("index", "seed", "repeat", "n", "L", "m", "sigma", "epochs", "step_size")}
    row.update(d=d, K=cfg.target.K, delta=cfg.delta, error="")
    try:
        pp = prepare_point(cfg, point)
        n, L, m, B, lam = pp.data.n, pp.arch.L, pp.arch.m, pp.B, pp.lam
        row.update(D=pp.arch.D, lam=lam, B=B)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            params, _ = train(pp.train_config, pp.data, pp.arch, init=pp.init)
            b = barron_norm_upper(pp.target)
            P = weighted_path_norm(params)
            train_risk = empirical_risk(pp.data, params)
            s_mc = pp.seeds["mc"]
            pop, se = population_risk_mc(pp.target, pp.noise, params, cfg.n_mc, s_mc)
            if B is not None:
                pop_B, se_B = population_risk_mc(pp.target, pp.noise, params, cfg.n_mc, s_mc, B=B)
                c = pp.noise.c if pp.noise.kind != "none" else 2.0
                prior = apriori_noisy_rhs(b, L, m, d, n, lam, B, cfg.delta, c, pp.noise.sigma)
            else:
                pop_B = se_B = None
                prior = apriori_rhs(b, L, m, d, n, lam, cfg.delta)
            post = apost_rhs(P, d, n, cfg.delta)
        gap = abs(pop - train_risk)
        row.update(
            train_risk=train_risk, pop_risk=pop, pop_se=se, pop_risk_B=pop_B, pop_se_B=se_B,
            path_norm=P, barron=b, apost_rhs=post, apriori_rhs=prior, gap=gap,
            apost_pass=bool(gap <= post), apriori_pass=bool(pop <= prior),
        )
    except Exception as exc:  # recorded per point, the rest of the grid proceeds
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def _pad(params, arch: ResNetArch):
    """Embed constructed parameters (skip width ``d + 1``) into a wider skip stream."""
    if params.arch.D == arch.D:
        return params
    if arch.D < params.arch.D:
        raise DomainError(f"D={arch.D} is too small for the construction (needs {params.arch.D})")
    k = params.arch.D
    V = np.zeros((arch.D, arch.d))
    V[:k] = params.V
    W = np.zeros((arch.L, arch.m, arch.D))
    W[:, :, :k] = params.W
    U = np.zeros((arch.L, arch.D, arch.m))
    U[:, :k, :] = params.U
    u = np.zeros(arch.D)
    u[:k] = params.u
    return ResNetParams(arch, V, W, U, u)


def _run_indexed(args):
    cfg, point = args
    return run_point(cfg, point)


def run_experiment(cfg: ExperimentConfig, jobs: int = 1) -> tuple[list[dict], dict]:
    """Run every grid point (in parallel with ``jobs > 1``); rows come back in grid order."""
    points = grid_points(cfg)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_run_indexed, [(cfg, p) for p in points]))
    else:
        rows = [run_point(cfg, p) for p in points]
    report = {
        "version": __version__,
        "config_hash": config_hash(cfg.to_json()),
        "config": cfg.to_json(),
        "seeds": {"base": cfg.seed, "target": cfg.target.seed, "points": [p["seed"] for p in points]},
        "n_points": len(points),
        "n_errors": sum(1 for r in rows if r["error"]),
        "errors": [{"index": r["index"], "error": r["error"]} for r in rows if r["error"]],
    }
    return rows, report


def results_csv(rows: list[dict], chash: str) -> str:
    return csv_text(CSV_COLUMNS + ["config_hash"], [dict(r, config_hash=chash) for r in rows])


def loglog_slope(ns, gaps) -> float:
    """Least-squares slope of ``log gap`` against ``log n``."""
    x = np.log(np.asarray(ns, dtype=np.float64))
    y = np.log(np.asarray(gaps, dtype=np.float64))
    return float(np.polyfit(x, y, 1)[0])
