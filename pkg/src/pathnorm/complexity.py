"""Empirical Rademacher complexity: exact enumeration for finite and l1-ball
linear classes, closed-form bounds, and ascent-based lower estimates for
residual networks with bounded weighted path norm.
"""

from __future__ import annotations

import itertools
import math
import numpy as np

from pathnorm.netcore import CapacityError, DomainError, ResNetArch
from pathnorm.train import Stack, backward, forward, path_norm_grad

MAX_ENUM = 20


def sign_patterns(n: int) -> np.ndarray:
    """All ``2^n`` vectors in ``{-1, +1}^n`` as rows."""
    if n > MAX_ENUM:
        raise CapacityError(f"2^{n} sign patterns exceed the enumeration limit 2^{MAX_ENUM}")
    return np.array(list(itertools.product((-1.0, 1.0), repeat=n)))


def rademacher_linear_exact(points) -> float:
    """Exact empirical complexity of ``{x -> w.x : ||w||_1 <= 1}``.

    The supremum of a linear functional over the l1 ball is the l_inf norm of
    ``sum_i xi_i x_i``; the expectation is an average over all sign patterns.
    """
    X = np.atleast_2d(np.asarray(points, dtype=np.float64))
    n = X.shape[0]
    xi = sign_patterns(n)
    return float(np.abs(xi @ X).max(axis=1).mean() / n)


def rademacher_finite_exact(values) -> float:
    """Exact empirical complexity of a finite class given as a ``(K, n)`` matrix of values."""
    values = np.atleast_2d(np.asarray(values, dtype=np.float64))
    n = values.shape[1]
    xi = sign_patterns(n)
    return float((xi @ values.T).max(axis=1).mean() / n)


def rademacher_bounds(kind: str, Q: float, d: int, n: int, max_xinf: float = 1.0) -> float:
    """Closed-form upper bounds.

    ``linear``: ``Q max_i ||x_i||_inf sqrt(2 log(2d) / n)`` for the l1 ball of radius Q.
    ``resnet``: ``3 Q sqrt(2 log(2d) / n)`` for networks with ``||theta||_P <= Q``.
    """
    if d < 1 or n < 1 or Q < 0:
        raise DomainError(f"need d >= 1, n >= 1, Q >= 0; got d={d}, n={n}, Q={Q}")
    root = math.sqrt(2.0 * math.log(2 * d) / n)
    if kind == "linear":
        return Q * max_xinf * root
    if kind == "resnet":
        return 3.0 * Q * root
    raise DomainError(f"unknown kind {kind!r}")


def gap_bound(rad: float, diam: float, n: int, delta: float) -> float:
    """``2 rad + 2 diam sqrt(2 log(4/delta) / n)``."""
    if not 0.0 < delta < 1.0:
        raise DomainError(f"delta must lie in (0, 1), got {delta}")
    return 2.0 * rad + 2.0 * diam * math.sqrt(2.0 * math.log(4.0 / delta) / n)


def _best_output_value(corr: np.ndarray, reach: np.ndarray, Q: float) -> np.ndarray:
    """``Q max_k |corr_k| / reach_k``: the best sign correlation over output vectors ``u``.

    ``corr = sum_i xi_i h_L(x_i)`` and ``reach = M_L ... M_1 |V| 1``; the norm is
    ``|u| . reach``, so the linear program in ``u`` is solved by one channel.
    """
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(reach > 0, np.abs(corr) / reach, 0.0)
    return Q * ratio.max(axis=-1)


def rademacher_lower_estimate(
    points,
    Q: float,
    arch: ResNetArch,
    n_xi: int = 64,
    restarts: int = 8,
    steps: int = 500,
    seed: int = 0,
    step: float = 0.05,
    linear_only: bool = False,
) -> tuple[float, float]:
    """Lower estimate of the empirical complexity of ``{f : ||theta||_P <= Q}``.

    For each of ``n_xi`` sign draws, ``restarts`` networks are pushed uphill on
    the sign correlation ``sum_i xi_i f(x_i)``. Each iterate is projected onto
    the norm ball by rescaling ``u`` to ``||theta||_P = Q`` (exact, since ``f``
    and the norm are both positively homogeneous in ``u``), so the ascent
    direction is that of the projected objective ``Q F / ||theta||_P``. Steps
    are normalized per network, with cosine decay. At every iterate the output
    vector is also re-solved exactly (see :func:`_best_output_value`); every
    recorded value belongs to a feasible network, so the result is a lower
    bound up to Monte Carlo error over the sign draws.

    ``linear_only`` freezes the residual blocks at zero, leaving the linear
    class ``x -> u.Vx``.

    Returns:
        ``(mean / n, standard error)`` over the sign draws.
    """
    X = np.atleast_2d(np.asarray(points, dtype=np.float64))
    n, d = X.shape
    if d != arch.d:
        raise DomainError(f"points have dimension {d}, arch expects {arch.d}")
    if Q < 0:
        raise DomainError("Q must be nonnegative")
    if Q == 0:
        return 0.0, 0.0
    rng = np.random.default_rng(seed)
    xi = rng.choice((-1.0, 1.0), size=(n_xi, n))
    S = n_xi * restarts
    xi_s = np.repeat(xi, restarts, axis=0)
    s0 = 1.0 / math.sqrt(arch.D * arch.m)
    st = Stack(
        rng.uniform(-s0, s0, (S, arch.D, arch.d)),
        rng.uniform(-s0, s0, (S, arch.L, arch.m, arch.D)),
        rng.uniform(-s0, s0, (S, arch.L, arch.D, arch.m)),
        rng.uniform(-1.0, 1.0, (S, arch.D)),
    )
    if linear_only:
        st.W[:] = 0.0
        st.U[:] = 0.0
    best = np.zeros(S)
    for t in range(steps + 1):
        norm, g_norm, reach = path_norm_grad(st)
        scale = np.where(norm > 0, Q / np.where(norm > 0, norm, 1.0), 1.0)
        st.u[:] *= scale[:, None]
        norm = norm * scale
        g_norm = Stack(g_norm.V * scale[:, None, None], g_norm.W * scale[:, None, None, None],
                       g_norm.U * scale[:, None, None, None], g_norm.u)
        f, cache = forward(st, X)
        F = (xi_s * f).sum(axis=1)
        corr = np.matmul(xi_s[:, None, :], cache[1][-1])[:, 0]
        best = np.maximum(best, _best_output_value(corr, reach, Q))
        best = np.maximum(best, F)
        if t == steps:
            break
        g_F = backward(st, cache, xi_s)
        # gradient of Q F / ||theta||_P at ||theta||_P = Q
        ratio = np.where(norm > 0, F / np.where(norm > 0, norm, 1.0), 0.0)
        lr = step * 0.5 * (1.0 + math.cos(math.pi * t / steps))
        grads = [gf - _bcast(ratio, gf) * gn for gf, gn in zip(g_F, g_norm)]
        if linear_only:
            grads[1] = np.zeros_like(grads[1])
            grads[2] = np.zeros_like(grads[2])
        gnorm = np.sqrt(sum((g.reshape(S, -1) ** 2).sum(axis=1) for g in grads))
        gnorm = np.where(gnorm > 0, gnorm, 1.0)
        for a, g in zip(st, grads):
            a += lr * g / _bcast(gnorm, g)
    per_draw = best.reshape(n_xi, restarts).max(axis=1) / n
    se = per_draw.std(ddof=1) / math.sqrt(n_xi) if n_xi > 1 else 0.0
    return float(per_draw.mean()), float(se)


def _bcast(v: np.ndarray, like: np.ndarray) -> np.ndarray:
    return v.reshape((-1,) + (1,) * (like.ndim - 1))
