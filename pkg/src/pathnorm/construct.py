"""Constructive approximation: two-layer ReLU expansions, their lifting into
deep residual and fully-connected networks, and Monte Carlo subsampling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from pathnorm.netcore import (
    CapacityError,
    DegenerateInputError,
    DomainError,
    FcParams,
    ResNetArch,
    ResNetParams,
    StructuralError,
    relu,
)
from pathnorm.targets import BarronMixture, Seed, as_rng


@dataclass(frozen=True, eq=False)
class TwoLayerRep:
    """``x -> sum_j a_j relu(b_j . x)`` with ``a`` of shape ``(M,)`` and ``b`` of shape ``(M, d)``."""

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = np.array(self.a, dtype=np.float64).reshape(-1)
        b = np.array(self.b, dtype=np.float64)
        if b.ndim != 2 or b.shape[0] != a.size or a.size < 1:
            raise StructuralError(f"need M >= 1 neurons with matching shapes, got a={a.shape}, b={b.shape}")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise StructuralError("non-finite entries")
        if np.any((a != 0) & ~np.any(b != 0, axis=1)):
            raise StructuralError("a neuron with nonzero coefficient has a zero direction")
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def M(self) -> int:
        return self.a.size

    @property
    def d(self) -> int:
        return self.b.shape[1]

    def path_mass(self) -> float:
        """``sum_j |a_j| ||b_j||_1``."""
        return float(np.abs(self.a) @ np.abs(self.b).sum(axis=1))

    def to_json(self) -> dict:
        return {"a": self.a.tolist(), "b": self.b.tolist()}

    @classmethod
    def from_json(cls, obj: dict) -> "TwoLayerRep":
        return cls(np.array(obj["a"], dtype=np.float64), np.array(obj["b"], dtype=np.float64))

    @classmethod
    def from_mixture(cls, target: BarronMixture) -> "TwoLayerRep":
        return cls(target.a, target.omega)


def two_layer_eval(rep: TwoLayerRep, x):
    x = np.asarray(x, dtype=np.float64)
    out = relu(np.atleast_2d(x) @ rep.b.T) @ rep.a
    return float(out[0]) if x.ndim == 1 else out


def normalize_two_layer(rep: TwoLayerRep) -> TwoLayerRep:
    """Rescale neurons so every ``|a_j|`` equals the path mass ``T`` and ``sum_j ||b_j||_1 = 1``.

    Uses positive homogeneity, ``a relu(b.x) = (s T) relu((|a| / T) b.x)``.
    Neurons with ``a_j = 0`` or ``b_j = 0`` are dropped first.
    """
    keep = (rep.a != 0) & np.any(rep.b != 0, axis=1)
    if not np.any(keep):
        raise DegenerateInputError("representation is identically zero")
    a = rep.a[keep]
    b = rep.b[keep]
    T = float(np.abs(a) @ np.abs(b).sum(axis=1))
    return TwoLayerRep(np.sign(a) * T, b * (np.abs(a) / T)[:, None])


def build_resnet(rep: TwoLayerRep, L: int, m: int) -> ResNetParams:
    """Stack the neurons of ``rep`` into ``L`` residual blocks of width ``m``.

    Skip width is ``D = d + 1``: the first ``d`` channels carry the input and the
    last one accumulates ``a_j relu(b_j . x)``. Neuron ``j`` sits in block
    ``j // m`` at row ``j % m``; unused slots stay zero.
    """
    M, d = rep.M, rep.d
    if M > L * m:
        raise CapacityError(f"{M} neurons do not fit in L*m = {L * m} slots")
    D = d + 1
    V = np.zeros((D, d))
    V[:d, :d] = np.eye(d)
    W = np.zeros((L, m, D))
    U = np.zeros((L, D, m))
    for j in range(M):
        l, i = divmod(j, m)
        W[l, i, :d] = rep.b[j]
        U[l, d, i] = rep.a[j]
    u = np.zeros(D)
    u[d] = 1.0
    return ResNetParams(ResNetArch(d, D, m, L), V, W, U, u)


def fc_layout(d: int, m: int, L: int, n_carriers: int) -> list[int]:
    """Number of fresh ReLU units available in each hidden layer of :func:`build_fc`."""
    if L == 2:
        return [m]
    slots = [m - d] + [max(0, m - d - n_carriers)] * (L - 3) + [max(0, m - n_carriers)]
    return slots


def build_fc(rep: TwoLayerRep, L: int, m: int, rtol: float = 1e-12) -> FcParams:
    """Fully-connected net of depth ``L`` and width ``m`` computing ``rep`` exactly on ``[0, inf)^d``.

    ``rep`` must be normalized (all ``|a_j|`` equal to a common ``a``).

    Hidden layer ``l`` holds the input copy (``d`` identity units, dropped in
    the last hidden layer), one nonnegative carrier per coefficient sign, and
    fresh units ``relu(z_j b_j . x)`` with ``z_j = ||b_j||_2^(-1/2)``. A fresh
    unit is routed into its sign's carrier at the next layer with weight
    ``1/z_j``; units of the last hidden layer feed the output row directly.
    The balanced scaling keeps every hidden ``||W_l||_s`` at
    ``sqrt(1 + max(||G_l||^2, ||R_l||^2)) <= sqrt(1 + sum_j ||b_j||_2)``.
    """
    d = rep.d
    if m <= d:
        raise CapacityError(f"width m={m} must exceed d={d}")
    if L < 2:
        raise StructuralError("need L >= 2")
    keep = rep.a != 0
    a_abs = np.abs(rep.a[keep])
    if a_abs.size == 0:
        return FcParams.zeros(d, m, L)
    a_val = float(a_abs[0])
    if np.any(np.abs(a_abs - a_val) > rtol * a_val):
        raise DomainError("build_fc needs a normalized representation (equal |a_j|)")
    signs = np.sign(rep.a[keep])
    b = rep.b[keep]
    carrier_signs = [s for s in (1.0, -1.0) if np.any(signs == s)] if L > 2 else []
    C = len(carrier_signs)
    slots = fc_layout(d, m, L, C)
    if b.shape[0] > sum(slots):
        raise CapacityError(f"{b.shape[0]} neurons do not fit in {sum(slots)} fresh units (layout {slots})")

    if L > 3 and d + C > m:
        raise CapacityError(f"width m={m} cannot hold {d} input copies and {C} carriers")

    # neuron j goes to the next free fresh unit, layer by layer
    placement: list[list[tuple[int, int]]] = [[] for _ in slots]
    j = 0
    for l, k in enumerate(slots):
        for s in range(k):
            if j < b.shape[0]:
                placement[l].append((s, j))
                j += 1

    H = L - 1
    mats = []
    prev_x = prev_c = 0
    for l in range(H):
        # the last hidden layer (and the single hidden layer when L == 2) drops the input copy
        x_units = d if (L > 2 and l < H - 1) else 0
        car = C if l > 0 else 0
        rows = np.zeros((m, d if l == 0 else m))
        rows[np.arange(x_units), np.arange(x_units)] = 1.0
        for c in range(car):
            if l > 1:
                rows[x_units + c, prev_x + c] = 1.0
            for s, jn in placement[l - 1]:
                if signs[jn] == carrier_signs[c]:
                    rows[x_units + c, prev_x + prev_c + s] = 1.0 / _unit_scale(b[jn])
        for s, jn in placement[l]:
            rows[x_units + car + s, :d] = _unit_scale(b[jn]) * b[jn]
        mats.append(rows)
        prev_x, prev_c = x_units, car

    out = np.zeros((1, m))
    for c in range(prev_c):
        out[0, prev_x + c] = a_val * carrier_signs[c]
    for s, jn in placement[H - 1]:
        out[0, prev_x + prev_c + s] = a_val * signs[jn] / _unit_scale(b[jn])
    mats.append(out)
    return FcParams(d, m, L, tuple(mats))


def _unit_scale(bj: np.ndarray) -> float:
    return 1.0 / math.sqrt(float(np.linalg.norm(bj)))


def subsample_two_layer(target: BarronMixture, M: int, seed: Seed = 0, exact_if_fits: bool = False) -> TwoLayerRep:
    """Width-``M`` unbiased estimate of ``target`` by importance sampling of its atoms.

    Atoms are drawn with replacement with probability ``|a_j| / A`` where
    ``A = sum_j |a_j|``; each draw contributes ``sign(a_j) A / M`` on direction
    ``omega_j``. With ``exact_if_fits`` and ``M >= K`` the atoms are returned as is.
    """
    if M < 1:
        raise DomainError(f"M must be >= 1, got {M}")
    A = float(np.abs(target.a).sum())
    if A == 0.0:
        raise DegenerateInputError("target is identically zero")
    if exact_if_fits and M >= target.K:
        return TwoLayerRep(target.a, target.omega)
    rng = as_rng(seed)
    p = np.abs(target.a) / A
    idx = rng.choice(target.K, size=M, replace=True, p=p)
    return TwoLayerRep(np.sign(target.a[idx]) * A / M, target.omega[idx])
