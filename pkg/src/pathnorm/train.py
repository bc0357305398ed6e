"""Reverse-mode gradients, weighted-path-norm subgradients and the regularized fit.

The engine works on *stacks* of parameter sets (leading axis ``S``) so the
Rademacher ascent in :mod:`pathnorm.complexity` can move many networks at once;
single-network helpers wrap a stack of one.

Kink conventions: ``relu'(0) = 0``, the truncation derivative is 1 on the
closed interval ``[0, 1]`` and 0 outside, ``sign(0) = 0`` in the penalty, and a
loss capped at ``B^2`` has zero derivative once ``loss >= B^2``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from pathnorm.netcore import Dataset, DomainError, ResNetArch, ResNetParams
from pathnorm.norms import weighted_path_norm


class Stack(NamedTuple):
    V: np.ndarray  # (S, D, d)
    W: np.ndarray  # (S, L, m, D)
    U: np.ndarray  # (S, L, D, m)
    u: np.ndarray  # (S, D)


def stack_of(params: ResNetParams) -> Stack:
    return Stack(params.V[None].copy(), params.W[None].copy(), params.U[None].copy(), params.u[None].copy())


def unstack(arch: ResNetArch, st: Stack, s: int = 0) -> ResNetParams:
    return ResNetParams(arch, st.V[s], st.W[s], st.U[s], st.u[s])


def _t(a: np.ndarray) -> np.ndarray:
    return np.swapaxes(a, -1, -2)


def forward(st: Stack, X: np.ndarray):
    """Outputs ``(S, n)`` for shared inputs ``X`` of shape ``(n, d)``, plus a cache for :func:`backward`."""
    h = np.matmul(X, _t(st.V))  # (S, n, D)
    hs, zs = [h], []
    L = st.W.shape[1]
    for l in range(L):
        z = np.matmul(h, _t(st.W[:, l]))  # (S, n, m)
        h = h + np.matmul(np.maximum(z, 0.0), _t(st.U[:, l]))
        zs.append(z)
        hs.append(h)
    f = np.matmul(h, st.u[:, :, None])[..., 0]
    return f, (X, hs, zs)


def backward(st: Stack, cache, df: np.ndarray) -> Stack:
    """Gradient of ``sum_n df[s, n] f_s(x_n)`` with respect to every stack member."""
    X, hs, zs = cache
    L = st.W.shape[1]
    gu = np.matmul(df[:, None, :], hs[-1])[:, 0]
    dh = df[:, :, None] * st.u[:, None, :]  # (S, n, D)
    gW = np.empty_like(st.W)
    gU = np.empty_like(st.U)
    for l in range(L - 1, -1, -1):
        z = zs[l]
        gU[:, l] = np.matmul(_t(dh), np.maximum(z, 0.0))
        dz = np.matmul(dh, st.U[:, l]) * (z > 0.0)
        gW[:, l] = np.matmul(_t(dz), hs[l])
        dh = dh + np.matmul(dz, st.W[:, l])
    gV = np.matmul(_t(dh), X)
    return Stack(gV, gW, gU, gu)


def path_norm_grad(st: Stack) -> tuple[np.ndarray, Stack, np.ndarray]:
    """Weighted path norms ``(S,)``, their subgradients, and the reach vector ``c_L = M_L ... M_1 |V| 1``.

    With ``M_l = I + 3|U_l||W_l|``, ``c_l = M_l c_{l-1}`` and ``r_{l-1} = r_l M_l``
    (``r_L = |u|``), the derivative with respect to ``|U_l|`` is
    ``3 r_l (|W_l| c_{l-1})^T`` and with respect to ``|W_l|`` is
    ``3 (|U_l|^T r_l) c_{l-1}^T``; signs are applied last.
    """
    aV, aW, aU, au = (np.abs(a) for a in st)
    L = st.W.shape[1]
    cs = [aV.sum(axis=2)]
    wc = []
    for l in range(L):
        t = np.matmul(aW[:, l], cs[-1][:, :, None])[..., 0]
        wc.append(t)
        cs.append(cs[-1] + 3.0 * np.matmul(aU[:, l], t[:, :, None])[..., 0])
    norm = (au * cs[-1]).sum(axis=1)
    r = au
    gW = np.empty_like(st.W)
    gU = np.empty_like(st.U)
    for l in range(L - 1, -1, -1):
        ur = np.matmul(r[:, None, :], aU[:, l])[:, 0]
        gU[:, l] = 3.0 * r[:, :, None] * wc[l][:, None, :]
        gW[:, l] = 3.0 * ur[:, :, None] * cs[l][:, None, :]
        r = r + 3.0 * np.matmul(ur[:, None, :], aW[:, l])[:, 0]
    gV = np.broadcast_to(r[:, :, None], st.V.shape)
    gu = cs[-1]
    grads = Stack(gV * np.sign(st.V), gW * np.sign(st.W), gU * np.sign(st.U), gu * np.sign(st.u))
    return norm, grads, cs[-1]


# --- regularized objective ----------------------------------------------------


def thresholds(d: int, B: Optional[float] = None, tau: float = 0.0, sigma: float = 0.0, n: Optional[int] = None):
    """``(lambda_min, B_min)`` for the regularized estimators.

    ``lambda_min = 4 + 2 B / (3 sqrt(2 log 2d))`` with ``B = 1`` in the noiseless
    case; ``B_min = 1 + max(tau, sigma sqrt(log n))`` when ``n`` is given.
    """
    if d < 2:
        raise DomainError(f"thresholds need d >= 2, got {d}")
    scale = 1.0 if B is None else float(B)
    lam_min = 4.0 + 2.0 * scale / (3.0 * math.sqrt(2.0 * math.log(2 * d)))
    B_min = None
    if n is not None:
        if n < 2:
            raise DomainError(f"B_min needs n >= 2, got {n}")
        B_min = 1.0 + max(tau, sigma * math.sqrt(math.log(n)))
    return lam_min, B_min


def penalty_coefficient(d: int, n: int, lam: float, B: Optional[float] = None) -> float:
    """Multiplier of the weighted path norm in the objective, ``3 lam [B] sqrt(2 log(2d) / n)``."""
    scale = 1.0 if B is None else float(B)
    return 3.0 * lam * scale * math.sqrt(2.0 * math.log(2 * d) / n)


def loss_grad(f: np.ndarray, y: np.ndarray, B: Optional[float] = None):
    t = np.clip(f, 0.0, 1.0)
    resid = t - y
    loss = resid * resid
    dl = 2.0 * resid * ((f >= 0.0) & (f <= 1.0))
    if B is not None:
        capped = loss >= B * B
        loss = np.where(capped, B * B, loss)
        dl = np.where(capped, 0.0, dl)
    return loss, dl


def regularized_objective(params: ResNetParams, data: Dataset, lam: float, B: Optional[float] = None) -> float:
    """Empirical (``B``-capped) risk plus ``penalty_coefficient * ||theta||_P``."""
    from pathnorm.netcore import empirical_risk

    risk = empirical_risk(data, params, B)
    return risk + penalty_coefficient(params.arch.d, data.n, lam, B) * weighted_path_norm(params)


def _objective_grad(st: Stack, X, y, lam: float, B: Optional[float], n_total: int, d: int, with_loss: bool = True):
    f, cache = forward(st, X)
    loss, dl = loss_grad(f, y[None, :], B)
    g_loss = backward(st, cache, dl / X.shape[0])
    norm, g_pen, _ = path_norm_grad(st)
    coef = penalty_coefficient(d, n_total, lam, B)
    risk = loss.mean(axis=1)
    if not with_loss:
        g_loss = Stack(*(np.zeros_like(a) for a in st))
        risk = np.zeros_like(risk)
    grads = Stack(*(gl + coef * gp for gl, gp in zip(g_loss, g_pen)))
    return risk + coef * norm, risk, norm, grads


def gradient(
    params: ResNetParams,
    data_batch: Dataset,
    lam: float,
    B: Optional[float] = None,
    n_total: Optional[int] = None,
    with_loss: bool = True,
) -> ResNetParams:
    """Subgradient of the objective restricted to ``data_batch``.

    The penalty coefficient uses ``n_total`` (default: batch size). With
    ``with_loss=False`` only the penalty term is differentiated.
    """
    if data_batch.n == 0:
        raise DomainError("gradient of an empty batch")
    n = data_batch.n if n_total is None else n_total
    _, _, _, g = _objective_grad(stack_of(params), data_batch.x, data_batch.y, lam, B, n, params.arch.d, with_loss)
    return unstack(params.arch, g)


# --- training loop ------------------------------------------------------------


class DivergenceError(RuntimeError):
    pass


@dataclass
class TrainConfig:
    lam: float
    B: Optional[float] = None
    step_size: float = 0.05
    batch_size: int = 32
    epochs: int = 100
    seed: int = 0
    init_scale: Optional[float] = None
    const_epochs: Optional[int] = None
    optimizer: str = "sgd"

    def __post_init__(self):
        if self.epochs < 1:
            raise DomainError("epochs must be >= 1")
        if self.batch_size < 1:
            raise DomainError("batch_size must be >= 1")
        if self.optimizer not in ("sgd", "adam"):
            raise DomainError(f"unknown optimizer {self.optimizer!r}")

    def to_json(self) -> dict:
        return asdict(self)


@dataclass
class TrainHistory:
    epoch: list = field(default_factory=list)
    risk: list = field(default_factory=list)
    path_norm: list = field(default_factory=list)
    objective: list = field(default_factory=list)
    checkpoints: list = field(default_factory=list)

    def append(self, epoch: int, risk: float, path_norm: float, objective: float) -> None:
        self.epoch.append(epoch)
        self.risk.append(risk)
        self.path_norm.append(path_norm)
        self.objective.append(objective)

    def rows(self) -> list[dict]:
        return [
            {"epoch": e, "risk": r, "path_norm": p, "objective": o}
            for e, r, p, o in zip(self.epoch, self.risk, self.path_norm, self.objective)
        ]


def init_params(arch: ResNetArch, rng: np.random.Generator, init_scale: Optional[float] = None) -> ResNetParams:
    """Uniform entries in ``[-s, s]`` with ``s = 1/sqrt(D m)`` by default; ``u`` uses ``1/D``."""
    s = init_scale if init_scale is not None else 1.0 / math.sqrt(arch.D * arch.m)
    return ResNetParams(
        arch,
        rng.uniform(-s, s, (arch.D, arch.d)),
        rng.uniform(-s, s, (arch.L, arch.m, arch.D)),
        rng.uniform(-s, s, (arch.L, arch.D, arch.m)),
        rng.uniform(-1.0 / arch.D, 1.0 / arch.D, arch.D),
    )


def train(
    config: TrainConfig,
    data: Dataset,
    arch: ResNetArch,
    init: Optional[ResNetParams] = None,
    keep_checkpoints: bool = False,
) -> tuple[ResNetParams, TrainHistory]:
    """Minibatch subgradient descent on the regularized objective.

    The step is constant for ``const_epochs`` epochs (default: half) and then
    decays as ``1/sqrt(t)``. The full-data objective is recorded after every
    epoch (row 0 is the initialization) and the best iterate is returned.
    With ``keep_checkpoints`` the parameters behind every history row are kept
    in ``history.checkpoints``.
    """
    if data.x.shape[1] != arch.d:
        raise DomainError(f"data dimension {data.x.shape[1]} != arch.d={arch.d}")
    lam_min, _ = thresholds(arch.d, config.B) if arch.d >= 2 else (0.0, None)
    if config.lam < lam_min:
        warnings.warn(f"lambda={config.lam} is below the certified threshold {lam_min:.12g}", RuntimeWarning)
    rng = np.random.default_rng(config.seed)
    params = init if init is not None else init_params(arch, rng, config.init_scale)
    st = stack_of(params)
    n = data.n
    const_epochs = config.epochs // 2 if config.const_epochs is None else config.const_epochs
    history = TrainHistory()

    def record(epoch: int):
        J, risk, norm, _ = _objective_grad(st, data.x, data.y, config.lam, config.B, n, arch.d)
        J, risk, norm = float(J[0]), float(risk[0]), float(norm[0])
        if not math.isfinite(J):
            raise DivergenceError(f"objective became non-finite at epoch {epoch}")
        history.append(epoch, risk, norm, J)
        if keep_checkpoints:
            history.checkpoints.append(unstack(arch, st))
        return J

    best_J = record(0)
    best = Stack(*(a.copy() for a in st))
    m1 = [np.zeros_like(a) for a in st]
    m2 = [np.zeros_like(a) for a in st]
    t_adam = 0
    for epoch in range(1, config.epochs + 1):
        lr = config.step_size
        if epoch > const_epochs:
            lr = config.step_size / math.sqrt(epoch - const_epochs + 1)
        order = rng.permutation(n)
        for start in range(0, n, config.batch_size):
            idx = order[start : start + config.batch_size]
            _, _, _, g = _objective_grad(st, data.x[idx], data.y[idx], config.lam, config.B, n, arch.d)
            if config.optimizer == "sgd":
                for a, ga in zip(st, g):
                    a -= lr * ga
            else:
                t_adam += 1
                for a, ga, ma, va in zip(st, g, m1, m2):
                    ma *= 0.9
                    ma += 0.1 * ga
                    va *= 0.999
                    va += 0.001 * ga * ga
                    a -= lr * (ma / (1 - 0.9**t_adam)) / (np.sqrt(va / (1 - 0.999**t_adam)) + 1e-8)
        J = record(epoch)
        if J < best_J:
            best_J = J
            best = Stack(*(a.copy() for a in st))
    return unstack(arch, best), history
