"""Residual and fully-connected ReLU networks: data model, forward passes, losses.

Inputs live in ``[0, 1]^(d-1)`` and are augmented with a leading 1, which plays
the role of the bias. All arithmetic is float64.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Optional

import numpy as np

from pathnorm.io import dumps

if TYPE_CHECKING:
    from pathnorm.targets import BarronMixture, NoiseModel


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class StructuralError(ValueError):
    """Array shapes do not match the declared architecture."""


class CapacityError(ValueError):
    """A request exceeds a size limit (path counts, widths, enumeration size)."""


class DegenerateInputError(ValueError):
    """The input is degenerate for the operation (e.g. an all-zero object)."""


def relu(z):
    return np.maximum(z, 0.0)


@dataclass(frozen=True)
class ResNetArch:
    d: int
    D: int
    m: int
    L: int

    def __post_init__(self):
        for name in ("d", "D", "m", "L"):
            if int(getattr(self, name)) < 1:
                raise StructuralError(f"{name} must be >= 1, got {getattr(self, name)}")


@dataclass(frozen=True, eq=False)
class ResNetParams:
    """Parameters of ``h_0 = Vx, g_l = relu(W_l h_{l-1}), h_l = h_{l-1} + U_l g_l, f = u.h_L``.

    ``W`` and ``U`` are stored stacked as arrays of shape ``(L, m, D)`` and
    ``(L, D, m)``. Arrays are copied and made read-only on construction.
    """

    arch: ResNetArch
    V: np.ndarray
    W: np.ndarray
    U: np.ndarray
    u: np.ndarray

    def __post_init__(self):
        a = self.arch
        shapes = {
            "V": (a.D, a.d),
            "W": (a.L, a.m, a.D),
            "U": (a.L, a.D, a.m),
            "u": (a.D,),
        }
        for name, shape in shapes.items():
            arr = np.array(getattr(self, name), dtype=np.float64)
            if arr.shape != shape:
                raise StructuralError(f"{name} has shape {arr.shape}, expected {shape}")
            if not np.all(np.isfinite(arr)):
                raise StructuralError(f"{name} has non-finite entries")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def zeros(cls, arch: ResNetArch) -> "ResNetParams":
        return cls(
            arch,
            np.zeros((arch.D, arch.d)),
            np.zeros((arch.L, arch.m, arch.D)),
            np.zeros((arch.L, arch.D, arch.m)),
            np.zeros(arch.D),
        )

    @classmethod
    def random(cls, arch: ResNetArch, rng: np.random.Generator, scale: float = 1.0) -> "ResNetParams":
        """Entries i.i.d. uniform in ``[-scale, scale]``."""
        return cls(
            arch,
            rng.uniform(-scale, scale, (arch.D, arch.d)),
            rng.uniform(-scale, scale, (arch.L, arch.m, arch.D)),
            rng.uniform(-scale, scale, (arch.L, arch.D, arch.m)),
            rng.uniform(-scale, scale, arch.D),
        )

    def replace(self, **arrays) -> "ResNetParams":
        kw = {k: getattr(self, k) for k in ("V", "W", "U", "u")}
        kw.update(arrays)
        return ResNetParams(self.arch, **kw)

    def flat(self) -> np.ndarray:
        return np.concatenate([self.V.ravel(), self.W.ravel(), self.U.ravel(), self.u.ravel()])

    @classmethod
    def from_flat(cls, arch: ResNetArch, vec) -> "ResNetParams":
        vec = np.asarray(vec, dtype=np.float64)
        sizes = [arch.D * arch.d, arch.L * arch.m * arch.D, arch.L * arch.D * arch.m, arch.D]
        if vec.size != sum(sizes):
            raise StructuralError(f"flat vector has {vec.size} entries, expected {sum(sizes)}")
        parts = np.split(vec, np.cumsum(sizes)[:-1])
        return cls(
            arch,
            parts[0].reshape(arch.D, arch.d),
            parts[1].reshape(arch.L, arch.m, arch.D),
            parts[2].reshape(arch.L, arch.D, arch.m),
            parts[3],
        )


@dataclass(frozen=True, eq=False)
class FcParams:
    """Fully-connected net ``W_L relu(W_{L-1} ... relu(W_1 x))``.

    Shapes: ``W_1`` is ``m x d``, middle layers ``m x m``, ``W_L`` is ``1 x m``.
    """

    d: int
    m: int
    L: int
    W: tuple = field(default=())

    def __post_init__(self):
        if self.L < 2:
            raise StructuralError(f"fully-connected nets need L >= 2, got {self.L}")
        if len(self.W) != self.L:
            raise StructuralError(f"expected {self.L} weight matrices, got {len(self.W)}")
        mats = []
        for l, w in enumerate(self.W):
            arr = np.array(w, dtype=np.float64)
            rows = 1 if l == self.L - 1 else self.m
            cols = self.d if l == 0 else self.m
            if arr.shape != (rows, cols):
                raise StructuralError(f"W_{l + 1} has shape {arr.shape}, expected {(rows, cols)}")
            if not np.all(np.isfinite(arr)):
                raise StructuralError(f"W_{l + 1} has non-finite entries")
            arr.setflags(write=False)
            mats.append(arr)
        object.__setattr__(self, "W", tuple(mats))

    @classmethod
    def zeros(cls, d: int, m: int, L: int) -> "FcParams":
        shapes = [(m, d)] + [(m, m)] * (L - 2) + [(1, m)]
        return cls(d, m, L, tuple(np.zeros(s) for s in shapes))


@dataclass(frozen=True)
class ForwardTrace:
    h: list
    g: list
    preact: list


@dataclass(frozen=True, eq=False)
class Dataset:
    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.array(self.x, dtype=np.float64)
        y = np.array(self.y, dtype=np.float64)
        if x.ndim != 2 or y.shape != (x.shape[0],):
            raise StructuralError(f"bad dataset shapes x={x.shape}, y={y.shape}")
        if x.shape[0] and not np.all(x[:, 0] == 1.0):
            raise DomainError("first input coordinate must be 1")
        if np.any(x < 0.0) or np.any(x > 1.0):
            raise DomainError("inputs must lie in [0, 1]^d")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    def subset(self, idx) -> "Dataset":
        return Dataset(self.x[idx], self.y[idx])


def augment_input(raw) -> np.ndarray:
    """Prepend the constant-1 coordinate to a point (or rows of points) of ``[0,1]^(d-1)``."""
    raw = np.asarray(raw, dtype=np.float64)
    if np.any(raw < 0.0) or np.any(raw > 1.0) or not np.all(np.isfinite(raw)):
        raise DomainError("raw coordinates must lie in [0, 1]")
    if raw.ndim <= 1:
        return np.concatenate([[1.0], raw.ravel()])
    return np.concatenate([np.ones((raw.shape[0], 1)), raw], axis=1)


def _as_points(params_d: int, x) -> tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    X = x[None, :] if single else x
    if X.ndim != 2 or X.shape[1] != params_d:
        raise StructuralError(f"input has shape {x.shape}, expected trailing dimension {params_d}")
    return X, single


def resnet_forward(params: ResNetParams, x, want_trace: bool = False):
    """Evaluate the residual network at one point or at the rows of ``x``.

    Returns ``f`` (a float for a single point, an array otherwise), and the
    :class:`ForwardTrace` as a second value when ``want_trace`` is set. Trace
    vectors carry a leading point axis for batched input.
    """
    X, single = _as_points(params.arch.d, x)
    h = X @ params.V.T
    hs, gs, zs = [h], [], []
    for l in range(params.arch.L):
        z = h @ params.W[l].T
        g = relu(z)
        h = h + g @ params.U[l].T
        zs.append(z)
        gs.append(g)
        hs.append(h)
    f = h @ params.u
    if single:
        f = float(f[0])
    if not want_trace:
        return f
    pick = (lambda a: a[0]) if single else (lambda a: a)
    return f, ForwardTrace([pick(a) for a in hs], [pick(a) for a in gs], [pick(a) for a in zs])


def fc_forward(params: FcParams, x):
    X, single = _as_points(params.d, x)
    a = X
    for l, w in enumerate(params.W):
        a = a @ w.T
        if l < params.L - 1:
            a = relu(a)
    f = a[:, 0]
    return float(f[0]) if single else f


def truncate(v):
    return np.clip(v, 0.0, 1.0)


def loss_from_output(f, y, B: Optional[float] = None):
    """``|T f - y|^2``, capped at ``B^2`` when ``B`` is given."""
    loss = (truncate(f) - y) ** 2
    if B is not None:
        loss = np.minimum(loss, B * B)
    return loss


def truncated_loss(x, y: float, params: ResNetParams, B: Optional[float] = None) -> float:
    return float(loss_from_output(resnet_forward(params, x), y, B))


def empirical_risk(data: Dataset, params: ResNetParams, B: Optional[float] = None) -> float:
    if data.n == 0:
        raise DomainError("empirical risk of an empty dataset")
    return float(np.mean(loss_from_output(resnet_forward(params, data.x), data.y, B)))


def population_risk_mc(
    target: "BarronMixture",
    noise: "NoiseModel",
    params: ResNetParams,
    n_mc: int,
    seed: int,
    B: Optional[float] = None,
    chunk: int = 200_000,
) -> tuple[float, float]:
    """Monte Carlo estimate of the truncated population risk and its standard error.

    Fresh points are drawn from the uniform distribution on ``{1} x [0,1]^(d-1)``
    with labels from ``target`` plus ``noise``.
    """
    from pathnorm.targets import sample_dataset

    if n_mc < 100:
        raise DomainError(f"n_mc must be >= 100, got {n_mc}")
    rng = np.random.default_rng(seed)
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < n_mc:
        k = min(chunk, n_mc - done)
        data = sample_dataset(target, k, noise, rng)
        loss = loss_from_output(resnet_forward(params, data.x), data.y, B)
        total += float(loss.sum())
        total_sq += float((loss * loss).sum())
        done += k
    mean = total / n_mc
    var = max(total_sq / n_mc - mean * mean, 0.0) * n_mc / (n_mc - 1)
    return mean, float(np.sqrt(var / n_mc))


# --- model files -------------------------------------------------------------


def _tolist(a):
    return np.asarray(a, dtype=np.float64).tolist()


def params_to_json(params) -> dict:
    if isinstance(params, ResNetParams):
        a = params.arch
        return {
            "kind": "resnet",
            "arch": {"d": a.d, "D": a.D, "m": a.m, "L": a.L},
            "V": _tolist(params.V),
            "W": _tolist(params.W),
            "U": _tolist(params.U),
            "u": _tolist(params.u),
        }
    if isinstance(params, FcParams):
        return {
            "kind": "fc",
            "arch": {"d": params.d, "m": params.m, "L": params.L},
            "W": [_tolist(w) for w in params.W],
        }
    raise TypeError(f"not a parameter set: {type(params).__name__}")


class ModelFileError(ValueError):
    """A model file is malformed; the message names the offending field."""


def params_from_json(obj: dict):
    try:
        kind = obj["kind"]
        arch = obj["arch"]
    except (KeyError, TypeError) as exc:
        raise ModelFileError(f"missing field {exc}") from None
    try:
        if kind == "resnet":
            a = ResNetArch(int(arch["d"]), int(arch["D"]), int(arch["m"]), int(arch["L"]))
            fields = {}
            for name in ("V", "W", "U", "u"):
                try:
                    fields[name] = np.array(obj[name], dtype=np.float64)
                except KeyError:
                    raise ModelFileError(f"missing field '{name}'") from None
                except (ValueError, TypeError) as exc:
                    raise ModelFileError(f"field '{name}': {exc}") from None
            return ResNetParams(a, **fields)
        if kind == "fc":
            W = []
            for l, w in enumerate(obj["W"]):
                try:
                    W.append(np.array(w, dtype=np.float64))
                except (ValueError, TypeError) as exc:
                    raise ModelFileError(f"field 'W[{l}]': {exc}") from None
            return FcParams(int(arch["d"]), int(arch["m"]), int(arch["L"]), tuple(W))
    except KeyError as exc:
        raise ModelFileError(f"missing field {exc}") from None
    raise ModelFileError(f"field 'kind': unknown model kind {kind!r}")


def save_model(params, path) -> None:
    Path(path).write_text(dumps(params_to_json(params)) + "\n", encoding="utf-8")


def load_model(path):
    text = Path(path).read_text(encoding="utf-8")
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFileError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return params_from_json(obj)


