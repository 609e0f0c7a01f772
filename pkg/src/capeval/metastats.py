"""Correlation coefficients, the Williams test, and score combination.

The Williams test compares two dependent correlations that share a third
variable (two metric columns against one human-judgment column) and reports
a one-tailed p-value for the hypothesis that the first correlation is the
larger one.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import betainc
from scipy.stats import rankdata


class UndefinedCorrelationError(ValueError):
    """A correlation is undefined because an input has zero variance."""


class DegenerateDfError(ValueError):
    """Too few samples for the requested test (needs n - 3 >= 1)."""


class NumericDomainError(ValueError):
    """Inputs leave the formula's numeric domain (reports K and operands)."""


@dataclass(frozen=True)
class ScoreVector:
    """Parallel (value, instance id) sequences; values must be finite."""

    values: np.ndarray
    instance_ids: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=np.float64))
        object.__setattr__(self, "instance_ids", tuple(self.instance_ids))
        if len(self.values) != len(self.instance_ids):
            raise ValueError(
                f"{len(self.values)} values vs {len(self.instance_ids)} instance ids"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError("score vectors must not contain NaN or infinity")

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class CorrelationResult:
    pearson: float
    spearman: float
    kendall: float


@dataclass(frozen=True)
class WilliamsResult:
    t: float
    df: int
    p: float
    r12: float
    r13: float
    r23: float
    n: int


def _paired(x: ScoreVector, y: ScoreVector) -> tuple[np.ndarray, np.ndarray]:
    if len(x) != len(y):
        raise ValueError(f"length mismatch: {len(x)} vs {len(y)}")
    if len(x) < 2:
        raise ValueError("correlation needs at least two samples")
    return x.values, y.values


def _pearson_arrays(xv: np.ndarray, yv: np.ndarray) -> float:
    dx = xv - xv.mean()
    dy = yv - yv.mean()
    var_x = float(dx @ dx)
    var_y = float(dy @ dy)
    if var_x == 0.0 or var_y == 0.0:
        raise UndefinedCorrelationError("zero variance input")
    r = float(dx @ dy) / math.sqrt(var_x * var_y)
    return min(1.0, max(-1.0, r))


def pearson(x: ScoreVector, y: ScoreVector) -> float:
    """Sample Pearson correlation."""
    return _pearson_arrays(*_paired(x, y))


def spearman(x: ScoreVector, y: ScoreVector) -> float:
    """Pearson correlation of fractional (tie-averaged) ranks."""
    xv, yv = _paired(x, y)
    return _pearson_arrays(rankdata(xv, method="average"), rankdata(yv, method="average"))


def kendall(x: ScoreVector, y: ScoreVector) -> float:
    """Kendall's tau-b (tie-corrected), O(n^2) pair scan."""
    xv, yv = _paired(x, y)
    n = len(xv)
    concordant_minus_discordant = 0.0
    ties_x = 0
    ties_y = 0
    for i in range(n - 1):
        sx = np.sign(xv[i + 1 :] - xv[i])
        sy = np.sign(yv[i + 1 :] - yv[i])
        concordant_minus_discordant += float(sx @ sy)
        ties_x += int(np.count_nonzero(sx == 0.0))
        ties_y += int(np.count_nonzero(sy == 0.0))
    total_pairs = n * (n - 1) // 2
    denom = math.sqrt(float(total_pairs - ties_x) * float(total_pairs - ties_y))
    if denom == 0.0:
        raise UndefinedCorrelationError("all pairs tied")
    return min(1.0, max(-1.0, concordant_minus_discordant / denom))


def t_cdf(t: float, df: int) -> float:
    """Student's t CDF through the regularized incomplete beta function."""
    if df < 1:
        raise ValueError(f"df must be >= 1, got {df}")
    x = df / (df + t * t)
    tail = 0.5 * float(betainc(0.5 * df, 0.5, x))
    return tail if t < 0 else 1.0 - tail


def williams_test(r13: float, r23: float, r12: float, n: int) -> WilliamsResult:
    """Significance of the difference between dependent correlations.

    Tests whether corr(X1, X3) exceeds corr(X2, X3) given corr(X1, X2), on
    n samples; p is the one-tailed upper-tail probability of the signed t
    statistic with n - 3 degrees of freedom.
    """
    if n < 4:
        raise DegenerateDfError(f"williams test needs n >= 4, got n={n}")
    for name, r in (("r13", r13), ("r23", r23), ("r12", r12)):
        if not -1.0 <= r <= 1.0:
            raise ValueError(f"{name}={r} outside [-1, 1]")
    df = n - 3
    # Commutative groupings keep t(r13, r23) == -t(r23, r13) bit-exact.
    k = 1.0 - r12 * r12 - (r13 * r13 + r23 * r23) + 2.0 * r12 * (r13 * r23)
    if k < -1e-9:
        raise NumericDomainError(
            f"K={k} < 0: ({r12=}, {r13=}, {r23=}) is not a realizable correlation triple"
        )
    k = max(k, 0.0)
    if r13 == r23:
        return WilliamsResult(0.0, df, 0.5, r12, r13, r23, n)
    numerator = (r13 - r23) * math.sqrt((n - 1) * (1.0 + r12))
    denom_sq = 2.0 * k * (n - 1) / df + ((r23 + r13) ** 2 / 4.0) * (1.0 - r12) ** 3
    if denom_sq <= 0.0:
        raise NumericDomainError(
            f"non-positive denominator (K={k}) for ({r12=}, {r13=}, {r23=}, {n=})"
        )
    t = numerator / math.sqrt(denom_sq)
    return WilliamsResult(t, df, 1.0 - t_cdf(t, df), r12, r13, r23, n)


def minmax_normalize(x: ScoreVector) -> ScoreVector:
    """Map values onto [0, 1]; a constant vector maps to all 0.5 (warned)."""
    if len(x) < 1:
        raise ValueError("cannot normalize an empty vector")
    low = float(x.values.min())
    high = float(x.values.max())
    if high == low:
        warnings.warn("constant score vector; min-max normalization returns 0.5")
        return ScoreVector(np.full(len(x), 0.5), x.instance_ids)
    return ScoreVector((x.values - low) / (high - low), x.instance_ids)


def combine(
    scores: Sequence[ScoreVector], weights: Sequence[float] | None = None
) -> ScoreVector:
    """Per-instance weighted mean of min-max normalized score vectors."""
    if not scores:
        raise ValueError("no score vectors to combine")
    first = scores[0]
    for other in scores[1:]:
        if len(other) != len(first):
            raise ValueError(f"length mismatch: {len(first)} vs {len(other)}")
        for pos, (a, b) in enumerate(zip(first.instance_ids, other.instance_ids)):
            if a != b:
                raise ValueError(
                    f"instance ids diverge at position {pos}: {a!r} vs {b!r}"
                )
    if weights is None:
        weights = [1.0] * len(scores)
    if len(weights) != len(scores):
        raise ValueError(f"{len(weights)} weights for {len(scores)} score vectors")
    total_weight = float(sum(weights))
    if total_weight <= 0.0:
        raise ValueError("weights must sum to a positive value")
    combined = np.zeros(len(first))
    for vector, weight in zip(scores, weights):
        combined += weight * minmax_normalize(vector).values
    return ScoreVector(combined / total_weight, first.instance_ids)
