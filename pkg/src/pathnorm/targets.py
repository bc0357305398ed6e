"""Synthetic Barron-space targets, data sampling and the sub-gaussian noise model."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from pathnorm.netcore import Dataset, DomainError, StructuralError, relu

Seed = Union[int, np.random.Generator]


def as_rng(seed: Seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


@dataclass(frozen=True, eq=False)
class BarronMixture:
    """Finite ReLU mixture ``f(x) = sum_j a_j relu(omega_j . x)``.

    Directions are normalized to unit l1 norm; ``rescale`` records the affine
    map (``{"scale": s, "shift": c}``) applied by :func:`random_mixture`, if any.
    """

    a: np.ndarray
    omega: np.ndarray
    rescale: Optional[dict] = field(default=None)

    def __post_init__(self):
        a = np.array(self.a, dtype=np.float64).reshape(-1)
        omega = np.array(self.omega, dtype=np.float64)
        if omega.ndim != 2 or omega.shape[0] != a.size or a.size < 1:
            raise StructuralError(f"need K >= 1 atoms with matching shapes, got a={a.shape}, omega={omega.shape}")
        norms = np.abs(omega).sum(axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-12):
            raise DomainError("every direction must have unit l1 norm")
        a.setflags(write=False)
        omega.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "omega", omega)

    @property
    def d(self) -> int:
        return self.omega.shape[1]

    @property
    def K(self) -> int:
        return self.a.size

    def to_json(self) -> dict:
        return {
            "d": self.d,
            "atoms": [{"a": float(a), "omega": w.tolist()} for a, w in zip(self.a, self.omega)],
            "rescale": self.rescale,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "BarronMixture":
        atoms = obj["atoms"]
        omega = np.array([at["omega"] for at in atoms], dtype=np.float64).reshape(len(atoms), -1)
        if "d" in obj and omega.shape[1] != int(obj["d"]):
            raise StructuralError(f"atom dimension {omega.shape[1]} != d={obj['d']}")
        return cls(np.array([at["a"] for at in atoms]), omega, obj.get("rescale"))


@dataclass(frozen=True)
class NoiseModel:
    """Label noise with tail certificate ``P(|eps| > t) <= c exp(-t^2 / (2 sigma^2))`` for ``t >= tau``."""

    kind: str = "none"
    sigma: float = 0.0
    c: float = 0.0
    tau: float = 0.0

    def __post_init__(self):
        if self.kind not in ("none", "gaussian"):
            raise DomainError(f"unknown noise kind {self.kind!r}")
        if self.kind == "gaussian" and (self.c != 2.0 or self.tau != 0.0):
            raise DomainError("gaussian noise carries the certificate c=2, tau=0")
        if self.sigma < 0:
            raise DomainError("sigma must be nonnegative")

    @classmethod
    def gaussian(cls, sigma: float) -> "NoiseModel":
        return cls("gaussian", float(sigma), 2.0, 0.0)

    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if self.kind == "none" or self.sigma == 0.0:
            return np.zeros(n)
        return rng.normal(0.0, self.sigma, n)


def mixture_eval(target: BarronMixture, x):
    """Evaluate the mixture at a point or at the rows of ``x``."""
    x = np.asarray(x, dtype=np.float64)
    out = relu(np.atleast_2d(x) @ target.omega.T) @ target.a
    return float(out[0]) if x.ndim == 1 else out


def barron_norm_upper(target: BarronMixture) -> float:
    """Minimal second moment of the coefficient density over masses on the fixed atoms.

    Writing ``f = sum_j (a_j / p_j) relu(omega_j . x) p_j``, the quantity
    ``sqrt(sum_j a_j^2 / p_j)`` is minimized over the simplex at
    ``p_j ~ |a_j|``, where it equals ``sum_j |a_j|``.
    """
    return float(np.abs(target.a).sum())


def random_mixture(
    K: int,
    d: int,
    coef_scale: float = 1.0,
    seed: Seed = 0,
    rescale: bool = False,
    n_probe: int = 20_000,
    margin: float = 0.05,
) -> BarronMixture:
    """Random mixture with l1-normalized directions.

    With ``rescale`` the target is mapped affinely so that its values over
    ``n_probe`` uniform probes lie in ``[margin, 1 - margin]``. The shift is a
    constant atom on the bias coordinate (``omega = e_0``), so the result is
    still a mixture; it then has ``K + 1`` atoms.
    """
    if K < 1 or d < 2:
        raise DomainError(f"need K >= 1 and d >= 2, got K={K}, d={d}")
    rng = as_rng(seed)
    omega = rng.uniform(-1.0, 1.0, (K, d))
    omega /= np.abs(omega).sum(axis=1, keepdims=True)
    a = rng.uniform(-coef_scale, coef_scale, K)
    if not rescale:
        return BarronMixture(a, omega)

    probes = uniform_inputs(rng, n_probe, d)
    vals = relu(probes @ omega.T) @ a
    lo, hi = float(vals.min()), float(vals.max())
    width = 1.0 - 2.0 * margin
    scale = min(1.0, width / (hi - lo)) if hi > lo else 1.0
    shift = margin - scale * lo
    e0 = np.zeros((1, d))
    e0[0, 0] = 1.0
    a = np.concatenate([scale * a, [shift]])
    omega = np.concatenate([omega, e0])
    return BarronMixture(a, omega, {"scale": scale, "shift": shift})


def constant_mixture(value: float, d: int) -> BarronMixture:
    """The constant function ``value`` as a single atom on the bias coordinate."""
    e0 = np.zeros((1, d))
    e0[0, 0] = 1.0
    return BarronMixture(np.array([value]), e0)


def uniform_inputs(rng: np.random.Generator, n: int, d: int) -> np.ndarray:
    """``n`` points uniform on ``{1} x [0,1]^(d-1)``."""
    x = rng.uniform(0.0, 1.0, (n, d))
    x[:, 0] = 1.0
    return x


def sample_dataset(target: BarronMixture, n: int, noise: NoiseModel = NoiseModel(), seed: Seed = 0) -> Dataset:
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    rng = as_rng(seed)
    x = uniform_inputs(rng, n, target.d)
    y = mixture_eval(target, x) + noise.draw(rng, n)
    return Dataset(x, y)


def gaussian_tail_bound(t, sigma: float, c: float = 2.0):
    return c * np.exp(-np.asarray(t) ** 2 / (2.0 * sigma * sigma))

