"""Sample statistics, randomized statistics, and the four randomized pivots.

Given data x_1, ..., x_n and a weight vector with deviations
d_i = w_i/m - 1/n, the pivots are

    T1 = sum d_i x_i           / (S_n     * sqrt(sum d_i^2))
    T2 = sum d_i x_i           / (S_{m,n} * sqrt(sum d_i^2))
    G1 = sum |d_i| (x_i - mu)  / (S_n     * sqrt(sum d_i^2))
    G2 = sum |d_i| (x_i - mu)  / (S_{m,n} * sqrt(sum d_i^2))

T-pivots target the sample mean, G-pivots target a hypothesized
population mean mu.  S_n^2 is the sample variance with divisor n (NOT the
n-1 most libraries default to), and S_{m,n}^2 is the weight-reweighted
sub-sample variance, computable from the w_i != 0 entries alone.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateWeights, MissingMu, TooFewObservations, ZeroScale
from .weights import WeightVector, weight_stats

__all__ = [
    "SampleStats",
    "RandomizedStats",
    "PivotKind",
    "sample_stats",
    "randomized_stats",
    "randomized_stats_from_nonzero",
    "pivot",
]


class PivotKind(enum.Enum):
    T1 = "t1"
    T2 = "t2"
    G1 = "g1"
    G2 = "g2"

    @property
    def needs_mu(self) -> bool:
        return self in (PivotKind.G1, PivotKind.G2)

    @property
    def uses_subsample_scale(self) -> bool:
        return self in (PivotKind.T2, PivotKind.G2)


@dataclass(frozen=True)
class SampleStats:
    """Sample mean and divisor-n sample variance."""

    n: int
    mean: float
    var_biased: float

    @property
    def sd(self) -> float:
        return math.sqrt(self.var_biased)

    @property
    def zero_variance(self) -> bool:
        return self.var_biased == 0.0


@dataclass(frozen=True)
class RandomizedStats:
    """Weight-reweighted mean/variance plus the absolute-deviation ratio mean.

    ``rmean`` and ``rvar`` need only the entries with w_i != 0.
    ``ratio_mean`` (the unbiased-given-weights estimator of mu) needs the
    whole sample; it is undefined for degenerate weights.
    """

    rmean: float
    rvar: float
    _ratio_mean: float | None = field(repr=False, default=None)

    @property
    def rsd(self) -> float:
        return math.sqrt(self.rvar)

    @property
    def ratio_mean(self) -> float:
        if self._ratio_mean is None:
            raise DegenerateWeights("ratio mean undefined: all weight deviations are zero")
        return self._ratio_mean


def sample_stats(x) -> SampleStats:
    """Mean and divisor-n variance of a sample with at least two points."""
    x = np.asarray(x, dtype=np.float64)
    n = x.size
    if n < 2:
        raise TooFewObservations(f"need at least 2 observations, got {n}")
    mean = math.fsum(x) / n
    var = math.fsum((x - mean) ** 2) / n
    return SampleStats(n=n, mean=mean, var_biased=var)


def randomized_stats_from_nonzero(values_nz: np.ndarray, counts_nz: np.ndarray,
                                  m: int) -> tuple[float, float]:
    """(rmean, rvar) from the sub-sample values and their counts.

    Shared by the in-memory and out-of-core paths; with matching index
    order the two produce bitwise-identical results.
    """
    values_nz = np.asarray(values_nz, dtype=np.float64)
    counts_nz = np.asarray(counts_nz, dtype=np.float64)
    rmean = math.fsum(counts_nz * values_nz) / m
    rvar = math.fsum(counts_nz * (values_nz - rmean) ** 2) / m
    return rmean, rvar


def randomized_stats(x, w: WeightVector) -> RandomizedStats:
    """Randomized sample mean/variance and the ratio estimator of mu."""
    x = np.asarray(x, dtype=np.float64)
    if x.size != w.n:
        raise ValueError(f"data length {x.size} != weight length {w.n}")
    idx, counts_nz = w.nonzero()
    rmean, rvar = randomized_stats_from_nonzero(x[idx], counts_nz, w.m)

    abs_dev = np.abs(w.counts / w.m - 1.0 / w.n)
    sabs = math.fsum(abs_dev)
    ratio = math.fsum(abs_dev * x) / sabs if sabs > 0.0 else None
    return RandomizedStats(rmean=rmean, rvar=rvar, _ratio_mean=ratio)


def pivot(kind: PivotKind, x, w: WeightVector, mu: float | None = None) -> float:
    """Evaluate one randomized pivot on a (data, weights) pair."""
    kind = PivotKind(kind)
    if kind.needs_mu and mu is None:
        raise MissingMu(f"{kind.value} requires the hypothesized mean mu")

    x = np.asarray(x, dtype=np.float64)
    if x.size != w.n:
        raise ValueError(f"data length {x.size} != weight length {w.n}")
    wstats = weight_stats(w)
    if wstats.degenerate:
        raise DegenerateWeights("all weights equal m/n; pivot denominators vanish")

    if kind.uses_subsample_scale:
        scale = randomized_stats(x, w).rsd
        if scale == 0.0:
            raise ZeroScale("sub-sample variance is zero")
    else:
        scale = sample_stats(x).sd
        if scale == 0.0:
            raise ZeroScale("sample variance is zero")

    dev = w.counts / w.m - 1.0 / w.n
    if kind.needs_mu:
        num = math.fsum(np.abs(dev) * (x - mu))
    else:
        num = math.fsum(dev * x)
    return num / (scale * math.sqrt(wstats.sum_sq_dev))
