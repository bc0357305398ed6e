"""Closed-form risk bounds: a priori and a posteriori estimates for the
weighted-path-norm estimator, the noisy variants, and the generic
norm/psi framework used to compare capacity measures.

All logarithms are natural.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field
from typing import Optional

from pathnorm.netcore import DomainError
from pathnorm.train import thresholds


def _check_delta(delta: float) -> None:
    if not 0.0 < delta < 1.0:
        raise DomainError(f"delta must lie in (0, 1), got {delta}")


def _check_n(n: int) -> None:
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")


def _root(d: int) -> float:
    return math.sqrt(2.0 * math.log(2 * d))


def apriori_rhs(barron: float, L: int, m: int, d: int, n: int, lam: float, delta: float) -> float:
    """``16 b^2/(Lm) + (12b+1)(3(4+lam) sqrt(2 log 2d) + 2)/sqrt(n) + 4 sqrt(2 log(14/delta)/n)``."""
    _check_delta(delta)
    _check_n(n)
    lam_min, _ = thresholds(d)
    if lam < lam_min:
        warnings.warn(f"lambda={lam} is below the certified threshold {lam_min:.12g}", RuntimeWarning)
    b = barron
    return (
        16.0 * b * b / (L * m)
        + (12.0 * b + 1.0) * (3.0 * (4.0 + lam) * _root(d) + 2.0) / math.sqrt(n)
        + 4.0 * math.sqrt(2.0 * math.log(14.0 / delta) / n)
    )


def apost_rhs(path_norm: float, d: int, n: int, delta: float) -> float:
    """``2(P+1)(6 sqrt(2 log 2d) + 1)/sqrt(n) + 2 sqrt(2 log(7/delta)/n)``."""
    _check_delta(delta)
    _check_n(n)
    return 2.0 * (path_norm + 1.0) * (6.0 * _root(d) + 1.0) / math.sqrt(n) + 2.0 * math.sqrt(
        2.0 * math.log(7.0 / delta) / n
    )


def apriori_noisy_rhs(
    barron: float, L: int, m: int, d: int, n: int, lam: float, B: float, delta: float, c: float, sigma: float
) -> float:
    """A priori bound under sub-gaussian label noise with loss cap ``B``."""
    _check_delta(delta)
    _check_n(n)
    lam_min, B_min = thresholds(d, B, sigma=sigma, n=n) if n >= 2 else (thresholds(d, B)[0], None)
    if lam < lam_min:
        warnings.warn(f"lambda={lam} is below the certified threshold {lam_min:.12g}", RuntimeWarning)
    if B_min is not None and B < B_min:
        warnings.warn(f"B={B} is below the certified threshold {B_min:.12g}", RuntimeWarning)
    b = barron
    rn = math.sqrt(n)
    return (
        16.0 * b * b / (L * m)
        + (12.0 * b + 1.0) * (3.0 * (4.0 + lam) * B * _root(d) + 2.0 * B * B) / rn
        + 4.0 * B * B * math.sqrt(2.0 * math.log(14.0 / delta) / n)
        + 2.0 * c * (4.0 * sigma * sigma + 1.0) / rn
    )


def noise_gap_rhs(c: float, sigma: float, n: int) -> float:
    """Bound on ``|L - L_B|``: ``c (4 sigma^2 + 1)/sqrt(n)``."""
    _check_n(n)
    return c * (4.0 * sigma * sigma + 1.0) / math.sqrt(n)


# --- generic norm framework ---------------------------------------------------


def apost_gen(norm: float, psi: float, n: int, delta: float) -> float:
    """``2(N+1)(2 psi + 1)/sqrt(n) + 2 sqrt(2 log(7/delta)/n)`` for a norm with Rademacher factor ``psi``."""
    _check_delta(delta)
    _check_n(n)
    return 2.0 * (norm + 1.0) * (2.0 * psi + 1.0) / math.sqrt(n) + 2.0 * math.sqrt(2.0 * math.log(7.0 / delta) / n)


def min_lambda(psi: float) -> float:
    """Smallest admissible regularization multiplier, ``4 + 2/psi``."""
    return 4.0 + 2.0 / psi


def estimation_term(norm_tilde: float, psi: float, n: int, lam: Optional[float] = None) -> float:
    """``(N + 1)((4 + lam) psi + 2)/sqrt(n)``, with ``lam = 4 + 2/psi`` by default."""
    lam = min_lambda(psi) if lam is None else lam
    return (norm_tilde + 1.0) * ((4.0 + lam) * psi + 2.0) / math.sqrt(n)


def apriori_gen(approx_error: float, norm_tilde: float, psi: float, n: int, delta: float, lam: Optional[float] = None) -> float:
    """``L(theta~) + (N+1)((4+lam) psi + 2)/sqrt(n) + 4 sqrt(2 log(14/delta)/n)``."""
    _check_delta(delta)
    _check_n(n)
    return approx_error + estimation_term(norm_tilde, psi, n, lam) + 4.0 * math.sqrt(2.0 * math.log(14.0 / delta) / n)


def psi_weighted_path(d: int) -> float:
    return 3.0 * _root(d)


def psi_l1_path(L: int, m: int) -> float:
    return 2.0**L * math.sqrt(2.0 * math.log(2 * m))


def psi_spectral(n: int, m: int) -> float:
    return 12.0 * math.log(n) * math.sqrt(2.0 * math.log(2 * m))


def psi_variational(L: int, m: int, d: int, n: int) -> float:
    return L * math.log(n) * math.sqrt((L - 2) * math.log(m) + math.log(8.0 * math.e * d))


@dataclass(frozen=True)
class NormEntry:
    """One row of the comparison: ``psi``, the certified norm of the constructed
    parameters, the a priori estimation term, and the split of ``N * psi`` into
    a power-law part and the explicit logarithmic factors."""

    name: str
    psi: float
    norm_tilde: float
    estimation: float
    power_part: float
    log_part: float


def framework_compare(L: int, m: int, d: int, n: int, barron: float) -> dict[str, NormEntry]:
    """Evaluate ``psi`` and the certified constructed-network norm for each capacity measure.

    ``power_part * log_part == norm_tilde * psi`` in every entry; ``power_part``
    carries the polynomial dependence on ``(L, m)``:

    - weighted path: ``12 b * 3`` times ``sqrt(2 log 2d)``; no ``(L, m)`` dependence.
    - l1 path: ``4 b 2^L`` times ``sqrt(2 log 2m)``.
    - spectral: ``192 b (Lm)^{3/2}`` times ``log n sqrt(2 log 2m)``.
    - variational: ``4 b L sqrt(m)`` times ``log n sqrt((L-2) log m + log(8ed))``;
      the bracket grows like ``sqrt(L)``, giving ``L^{3/2} sqrt(m)`` overall.
    """
    if L < 2:
        raise DomainError("need L >= 2")
    if m <= d:
        raise DomainError(f"fully-connected norms need m > d, got m={m}, d={d}")
    _check_n(n)
    b = barron
    lm2 = math.sqrt(2.0 * math.log(2 * m))
    rows = {
        "weighted_path": (psi_weighted_path(d), 12.0 * b, 36.0 * b, _root(d)),
        "l1_path": (psi_l1_path(L, m), 4.0 * b, 4.0 * b * 2.0**L, lm2),
        "spectral": (psi_spectral(n, m), 16.0 * (L * m) ** 1.5 * b, 192.0 * b * (L * m) ** 1.5, math.log(n) * lm2),
        "variational": (
            psi_variational(L, m, d, n),
            4.0 * math.sqrt(m) * b,
            4.0 * b * L * math.sqrt(m),
            math.log(n) * math.sqrt((L - 2) * math.log(m) + math.log(8.0 * math.e * d)),
        ),
    }
    return {
        name: NormEntry(name, psi, nt, estimation_term(nt, psi, n), power, logs)
        for name, (psi, nt, power, logs) in rows.items()
    }


# --- report -------------------------------------------------------------------


@dataclass
class BoundReport:
    barron: float
    L: int
    m: int
    d: int
    n: int
    lam: float
    delta: float
    B: Optional[float] = None
    c: float = 2.0
    sigma: float = 0.0
    path_norm: Optional[float] = None
    apriori_rhs: float = field(init=False)
    apost_rhs: Optional[float] = field(init=False)
    apriori_noisy_rhs: Optional[float] = field(init=False)
    noise_gap_rhs: float = field(init=False)
    lam_certified: bool = field(init=False)
    B_certified: Optional[bool] = field(init=False)
    frameworks: Optional[dict] = field(init=False)

    def __post_init__(self):
        lam_min, B_min = thresholds(self.d, self.B, sigma=self.sigma, n=self.n if self.n >= 2 else None)
        self.lam_certified = self.lam >= lam_min
        self.B_certified = None if self.B is None or B_min is None else self.B >= B_min
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            self.apriori_rhs = apriori_rhs(self.barron, self.L, self.m, self.d, self.n, self.lam, self.delta)
            self.apriori_noisy_rhs = (
                None
                if self.B is None
                else apriori_noisy_rhs(
                    self.barron, self.L, self.m, self.d, self.n, self.lam, self.B, self.delta, self.c, self.sigma
                )
            )
        self.apost_rhs = None if self.path_norm is None else apost_rhs(self.path_norm, self.d, self.n, self.delta)
        self.noise_gap_rhs = noise_gap_rhs(self.c, self.sigma, self.n)
        if self.L >= 2 and self.m > self.d:
            self.frameworks = {k: asdict(v) for k, v in framework_compare(self.L, self.m, self.d, self.n, self.barron).items()}
        else:
            self.frameworks = None
        if not self.lam_certified:
            warnings.warn(f"lambda={self.lam} is below the certified threshold {lam_min:.12g}", RuntimeWarning)
        if self.B_certified is False:
            warnings.warn(f"B={self.B} is below the certified threshold {B_min:.12g}", RuntimeWarning)

    def to_json(self) -> dict:
        return asdict(self)

    def csv_row(self) -> dict:
        """Flat row: scalars as is, comparison entries as ``<norm>_<field>`` columns."""
        out = {k: v for k, v in asdict(self).items() if k != "frameworks"}
        for name, entry in (self.frameworks or {}).items():
            for key in ("psi", "norm_tilde", "estimation"):
                out[f"{name}_{key}"] = entry[key]
        return out
