"""Parameter norms: weighted and l1 path norms, per-neuron path norms,
spectral complexity and the variational norm, plus a path-enumeration oracle.
"""

from __future__ import annotations

import warnings
from dataclasses import asdict, dataclass
from typing import Optional, Sequence, Union

import numpy as np

from pathnorm.netcore import CapacityError, DegenerateInputError, FcParams, ResNetParams

MAX_PATHS = 10**7


@dataclass(frozen=True)
class NormReport:
    weighted_path: float
    l1_path: float
    spectral: Optional[float] = None
    variational: Optional[float] = None

    def to_json(self) -> dict:
        return asdict(self)


def _block_factors(params: ResNetParams, weight: float) -> list[np.ndarray]:
    eye = np.eye(params.arch.D)
    return [eye + weight * np.abs(U) @ np.abs(W) for W, U in zip(params.W, params.U)]


def _path_product(params: ResNetParams, weight: float) -> float:
    c = np.abs(params.V).sum(axis=1)  # |V| 1
    for M in _block_factors(params, weight):
        c = M @ c
    return float(np.abs(params.u) @ c)


def weighted_path_norm(params: ResNetParams) -> float:
    """``|| |u|^T (I + 3|U_L||W_L|) ... (I + 3|U_1||W_1|) |V| ||_1``."""
    return _path_product(params, 3.0)


def l1_path_norm(params: ResNetParams) -> float:
    """Same product as :func:`weighted_path_norm` with weight 1 on the residual branch."""
    return _path_product(params, 1.0)


def path_count(params: ResNetParams) -> int:
    a = params.arch
    return a.d * a.D * (1 + a.m * a.D) ** a.L


def path_norm_by_enumeration(params: ResNetParams, max_paths: int = MAX_PATHS) -> float:
    """Sum of ``3^p * prod |w|`` over every input-to-output path, listed explicitly.

    A path enters skip channel ``k`` through ``V[k, i]``; at each block it either
    stays on its channel (weight 1) or passes neuron ``j`` into channel ``k'``
    (weight ``3 |W_l[j, k]| |U_l[k', j]|``); it leaves through ``u[k]``. Every
    path is materialized as its own array entry.
    """
    a = params.arch
    count = path_count(params)
    if count > max_paths:
        raise CapacityError(f"{count} paths exceed the enumeration limit {max_paths}")
    D = a.D
    # prefix weights and current channel, one entry per path prefix
    weight = np.abs(params.V).T.reshape(-1)  # (i, k) row-major
    channel = np.tile(np.arange(D), a.d)
    for l in range(a.L):
        absW = np.abs(params.W[l])  # (m, D)
        absU = np.abs(params.U[l])  # (D, m)
        # residual branch: for each prefix, each neuron j and each target channel k'
        branch = 3.0 * weight[:, None, None] * absW[:, channel].T[:, :, None] * absU.T[None, :, :]
        new_channel = np.broadcast_to(np.arange(D), branch.shape)
        weight = np.concatenate([weight, branch.reshape(-1)])
        channel = np.concatenate([channel, new_channel.reshape(-1)])
    return float(np.sum(weight * np.abs(params.u)[channel]))


def neuron_path_norms(params: ResNetParams) -> np.ndarray:
    """Matrix whose ``(l, i)`` entry is the weighted path norm of hidden neuron ``g_l^i``."""
    a = params.arch
    out = np.empty((a.L, a.m))
    c = np.abs(params.V).sum(axis=1)
    for l, M in enumerate(_block_factors(params, 3.0)):
        out[l] = 3.0 * np.abs(params.W[l]) @ c
        c = M @ c
    return out


def norm_21(A) -> float:
    """Sum over columns of ``A`` of the column l2 norms."""
    return float(np.linalg.norm(np.asarray(A, dtype=np.float64), axis=0).sum())


def spectral_norm(A, tol: float = 1e-10, max_iter: int = 10_000, seed: int = 0) -> tuple[float, bool]:
    """Largest singular value by power iteration on ``A^T A``.

    The start vector is drawn from ``default_rng(seed)``. Iteration stops when
    successive estimates agree to relative tolerance ``tol``; the second return
    value is False if ``max_iter`` was reached first.
    """
    A = np.asarray(A, dtype=np.float64)
    if not np.any(A):
        return 0.0, True
    v = np.random.default_rng(seed).standard_normal(A.shape[1])
    v /= np.linalg.norm(v)
    sigma = 0.0
    for _ in range(max_iter):
        w = A @ v
        new = float(np.linalg.norm(w))
        z = A.T @ w
        nz = np.linalg.norm(z)
        if nz == 0.0:
            return new, True
        v = z / nz
        if abs(new - sigma) <= tol * new:
            return new, True
        sigma = new
    return sigma, False


def _fc_weights(params: Union[FcParams, Sequence]) -> list[np.ndarray]:
    if isinstance(params, FcParams):
        return list(params.W)
    return [np.atleast_2d(np.asarray(w, dtype=np.float64)) for w in params]


def spectral_complexity(params: Union[FcParams, Sequence], tol: float = 1e-10) -> float:
    """``prod_l ||W_l||_s * (sum_l ||W_l^T||_{2,1}^{2/3} / ||W_l||_s^{2/3})^{3/2}``.

    Accepts an :class:`FcParams` or a bare list of layer matrices.
    """
    mats = _fc_weights(params)
    prod = 1.0
    acc = 0.0
    for l, w in enumerate(mats):
        s, ok = spectral_norm(w, tol=tol, seed=l)
        if not ok:
            warnings.warn(f"power iteration hit the cap on layer {l + 1}", RuntimeWarning)
        if s == 0.0:
            raise DegenerateInputError(f"W_{l + 1} is identically zero")
        prod *= s
        acc += (norm_21(w.T) / s) ** (2.0 / 3.0)
    return prod * acc**1.5


def variational_masses(params: Union[FcParams, Sequence]) -> tuple[float, list[tuple[np.ndarray, np.ndarray]]]:
    """Total path mass ``V`` and per-layer ``(V_in, V_out)`` vectors.

    ``V_in[j]`` is the absolute path mass from the inputs into neuron ``j`` of
    layer ``l``; ``V_out[j]`` the mass from that neuron to the output. The last
    layer's single neuron is the output itself (``V_out = 1``).
    """
    mats = [np.abs(w) for w in _fc_weights(params)]
    L = len(mats)
    ins = []
    c = np.ones(mats[0].shape[1])
    for w in mats:
        c = w @ c
        ins.append(c)
    outs = [None] * L
    r = np.ones(mats[-1].shape[0])
    outs[L - 1] = r
    for l in range(L - 1, 0, -1):
        r = r @ mats[l]
        outs[l - 1] = r
    V = float(ins[-1].sum())
    return V, list(zip(ins, outs))


def variational_norm(params: Union[FcParams, Sequence]) -> float:
    """``(1/L) sqrt(V) sum_l sum_j sqrt(V_in[j] V_out[j])``."""
    V, layers = variational_masses(params)
    total = sum(float(np.sqrt(vin * vout).sum()) for vin, vout in layers)
    return float(np.sqrt(V) * total / len(layers))


def fc_path_norm(params: Union[FcParams, Sequence]) -> float:
    """l1 path norm of a fully-connected net, ``|| |W_L| ... |W_1| ||_1``."""
    return variational_masses(params)[0]


def norm_report(params: Union[ResNetParams, FcParams]) -> NormReport:
    if isinstance(params, ResNetParams):
        return NormReport(weighted_path_norm(params), l1_path_norm(params))
    V = fc_path_norm(params)
    # every fc path crosses L-1 nonlinearities
    weighted = 3.0 ** (params.L - 1) * V
    spectral = spectral_complexity(params) if all(np.any(w) for w in params.W) else None
    return NormReport(weighted, V, spectral, variational_norm(params))
