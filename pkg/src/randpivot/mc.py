"""Deterministic Monte Carlo harness for coverage and proportion studies.

Every replication draws from its own stream derived from (seed, indices),
so identical (seed, parameters) give identical reports no matter how the
work is partitioned over processes.  Replications whose weights are
degenerate or whose studentizing scale vanishes are redrawn from a fresh
stream keyed by an attempt counter and counted, so the nominal
replication count is always met.

Each study also evaluates the classical Student t-statistic for the mean
on the same data replications, so the randomized pivot and its classical
comparator come from one seeded run.  The comparator uses the
conventional divisor-(n-1) standard deviation: that is the statistic
whose exact cutoffs t_{alpha,n-1} are exact-size under normal data.
"""
from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Any, Iterable

import numpy as np
from scipy.stats import t as _student_t

from ._normal import norm_cdf
from .errors import BadParams, DegenerateWeights, RandPivotError, ZeroScale
from .intervals import ci_mu, critical_z
from .pivots import PivotKind, pivot
from .rng import stream
from .weights import draw_weights

__all__ = [
    "SCHEMA_VERSION", "DistributionSpec", "parse_dist", "gen_sample",
    "CoverageReport", "ProportionReport", "coverage_study",
    "proportion_study", "kolmogorov_distance", "student_t_cutoff",
    "to_json", "to_csv",
]

SCHEMA_VERSION = 1
MAX_REDRAWS = 100

_FAMILIES = {
    "binomial": 2, "poisson": 1, "lognormal": 2, "lognormal_std": 2,
    "exponential": 1, "normal": 2, "beta": 2, "uniform": 2,
}


@dataclass(frozen=True)
class DistributionSpec:
    """A sampling family with parameters and a closed-form mean."""

    family: str
    params: tuple[float, ...]

    def __post_init__(self):
        fam = self.family
        if fam not in _FAMILIES:
            raise BadParams(f"unknown family {fam!r}")
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        p = self.params
        if len(p) != _FAMILIES[fam]:
            raise BadParams(f"{fam} takes {_FAMILIES[fam]} parameters, got {len(p)}")
        ok = True
        if fam == "binomial":
            ok = p[0] >= 1 and p[0] == int(p[0]) and 0.0 <= p[1] <= 1.0
        elif fam == "poisson":
            ok = p[0] > 0
        elif fam in ("lognormal", "lognormal_std"):
            ok = p[1] > 0
        elif fam == "exponential":
            ok = p[0] > 0
        elif fam == "normal":
            ok = p[1] > 0
        elif fam == "beta":
            ok = p[0] > 0 and p[1] > 0
        elif fam == "uniform":
            ok = p[0] < p[1]
        if not ok:
            raise BadParams(f"bad parameters {p} for family {fam}")

    @property
    def true_mean(self) -> float:
        p = self.params
        return {
            "binomial": lambda: p[0] * p[1],
            "poisson": lambda: p[0],
            "lognormal": lambda: math.exp(p[0] + 0.5 * p[1] ** 2),
            "lognormal_std": lambda: 0.0,
            "exponential": lambda: 1.0 / p[0],
            "normal": lambda: p[0],
            "beta": lambda: p[0] / (p[0] + p[1]),
            "uniform": lambda: 0.5 * (p[0] + p[1]),
        }[self.family]()

    def label(self) -> str:
        args = ",".join(f"{v:g}" for v in self.params)
        return f"{self.family}({args})"


def parse_dist(text: str) -> DistributionSpec:
    """Parse 'family:p1,p2' (e.g. 'normal:0,1', 'poisson:1')."""
    name, _, rest = text.strip().lower().partition(":")
    params = tuple(float(tok) for tok in rest.split(",")) if rest else ()
    return DistributionSpec(family=name, params=params)


def gen_sample(d: DistributionSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    """n i.i.d. draws from the family, as float64."""
    p = d.params
    fam = d.family
    if fam == "binomial":
        return rng.binomial(int(p[0]), p[1], n).astype(np.float64)
    if fam == "poisson":
        return rng.poisson(p[0], n).astype(np.float64)
    if fam == "lognormal":
        return rng.lognormal(p[0], p[1], n)
    if fam == "lognormal_std":
        raw = rng.lognormal(p[0], p[1], n)
        mean = math.exp(p[0] + 0.5 * p[1] ** 2)
        sd = mean * math.sqrt(math.expm1(p[1] ** 2))
        return (raw - mean) / sd
    if fam == "exponential":
        return rng.exponential(1.0 / p[0], n)
    if fam == "normal":
        return rng.normal(p[0], p[1], n)
    if fam == "beta":
        return rng.beta(p[0], p[1], n)
    if fam == "uniform":
        return rng.uniform(p[0], p[1], n)
    raise BadParams(f"unknown family {fam!r}")


def student_t_cutoff(alpha: float, df: int) -> float:
    """Upper-tail Student t critical value t_{alpha, df}."""
    return float(_student_t.ppf(1.0 - alpha, df))


@dataclass(frozen=True)
class CoverageReport:
    dist: str
    n: int
    m: int
    pivot: str
    reps: int
    alpha: float
    sided: str
    coverage: float
    classical_coverage: float
    classical_cutoff: str
    degenerate_count: int
    seed: int

    @property
    def stderr(self) -> float:
        return math.sqrt(self.coverage * (1.0 - self.coverage) / self.reps)

    def to_dict(self) -> dict[str, Any]:
        return {
            "schema_version": SCHEMA_VERSION, "kind": "coverage",
            "dist": self.dist, "n": self.n, "m": self.m, "pivot": self.pivot,
            "reps": self.reps, "alpha": self.alpha, "sided": self.sided,
            "coverage": self.coverage, "stderr": self.stderr,
            "classical_coverage": self.classical_coverage,
            "classical_cutoff": self.classical_cutoff,
            "degenerate_count": self.degenerate_count, "seed": self.seed,
        }


@dataclass(frozen=True)
class ProportionReport:
    dist: str
    n: int
    m: int
    pivot: str
    outer_reps: int
    inner_reps: int
    alpha: float
    sided: str
    band: tuple[float, float]
    proportion: float
    classical_proportion: float
    classical_cutoff: str
    degenerate_count: int
    seed: int

    def to_dict(self) -> dict[str, Any]:
        return {
            "schema_version": SCHEMA_VERSION, "kind": "proportion",
            "dist": self.dist, "n": self.n, "m": self.m, "pivot": self.pivot,
            "outer_reps": self.outer_reps, "inner_reps": self.inner_reps,
            "alpha": self.alpha, "sided": self.sided,
            "band_low": self.band[0], "band_high": self.band[1],
            "proportion": self.proportion,
            "classical_proportion": self.classical_proportion,
            "classical_cutoff": self.classical_cutoff,
            "degenerate_count": self.degenerate_count, "seed": self.seed,
        }


def _cutoff_value(kind: str, alpha: float, sided: str, n: int) -> float:
    half = alpha / 2.0 if sided == "two" else alpha
    if kind == "normal":
        return critical_z(half)
    if kind == "student_t":
        return student_t_cutoff(half, n - 1)
    raise ValueError(f"classical_cutoff must be 'normal' or 'student_t', got {kind!r}")


def _event(value: float, cutoff: float, sided: str) -> bool:
    if sided == "upper":
        return value <= cutoff
    if sided == "lower":
        return value >= -cutoff
    return abs(value) <= cutoff


def _classical_t(x: np.ndarray, mu: float) -> float:
    n = x.size
    s1 = float(x.std(ddof=1))
    if s1 == 0.0:
        raise ZeroScale("classical t: sample s.d. is zero")
    return (float(x.mean()) - mu) / (s1 / math.sqrt(n))


def _one_replication(d: DistributionSpec, n: int, m: int, kind: PivotKind,
                     seed: int, r: int) -> tuple[float, float, int]:
    """Pivot value and classical t for replication r, redrawing degenerates."""
    mu = d.true_mean
    for attempt in range(MAX_REDRAWS):
        rng = stream(seed, r, attempt)
        x = gen_sample(d, n, rng)
        w = draw_weights(n, m, rng)
        try:
            val = pivot(kind, x, w, mu=mu if kind.needs_mu else None)
            tval = _classical_t(x, mu)
        except (DegenerateWeights, ZeroScale):
            continue
        return val, tval, attempt
    raise RandPivotError(
        f"replication {r}: {MAX_REDRAWS} consecutive degenerate draws; "
        f"the configuration {d.label()}, n={n}, m={m} looks unusable"
    )


def _coverage_chunk(args) -> tuple[int, int, int]:
    (d, n, m, kind, alpha, sided, seed, cutoff_kind, start, stop) = args
    z = critical_z(alpha / 2.0 if sided == "two" else alpha)
    cutoff = _cutoff_value(cutoff_kind, alpha, sided, n)
    mu = d.true_mean
    hits = t_hits = degenerate = 0
    for r in range(start, stop):
        if kind.needs_mu:
            # Interval route: cover mu with the one- or two-sided ci_mu.
            for attempt in range(MAX_REDRAWS):
                rng = stream(seed, r, attempt)
                x = gen_sample(d, n, rng)
                w = draw_weights(n, m, rng)
                try:
                    ci = ci_mu(x, w, alpha, variant=kind.value, sided=sided)
                    tval = _classical_t(x, mu)
                except (DegenerateWeights, ZeroScale):
                    continue
                hits += ci.contains(mu)
                t_hits += _event(tval, cutoff, sided)
                degenerate += attempt
                break
            else:
                raise RandPivotError(f"replication {r}: too many degenerate draws")
        else:
            # Event route: the T-pivots cover the sample mean iff the
            # pivot falls below (within, for two-sided) the cutoff.
            val, tval, attempt = _one_replication(d, n, m, kind, seed, r)
            hits += _event(val, z, sided)
            t_hits += _event(tval, cutoff, sided)
            degenerate += attempt
    return hits, t_hits, degenerate


def _run_chunks(worker, argses: list, threads: int) -> list:
    if threads <= 1 or len(argses) <= 1:
        return [worker(a) for a in argses]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(worker, argses))


def _split(total: int, pieces: int) -> list[tuple[int, int]]:
    pieces = max(1, min(pieces, total))
    step = math.ceil(total / pieces)
    return [(lo, min(lo + step, total)) for lo in range(0, total, step)]


def coverage_study(d: DistributionSpec, n: int, m: int, pivot_kind: PivotKind,
                   reps: int, alpha: float, sided: str = "upper", seed: int = 0,
                   classical_cutoff: str = "normal", threads: int = 1) -> CoverageReport:
    """Empirical coverage of one pivot over seeded replications.

    Each replication r draws a fresh sample and weight vector from
    stream(seed, r, attempt).  G-pivots cover the population mean via
    ci_mu; T-pivots cover the sample mean via the pivot-cutoff event.
    """
    if reps < 1:
        raise ValueError("reps must be positive")
    pivot_kind = PivotKind(pivot_kind)
    argses = [
        (d, n, m, pivot_kind, alpha, sided, seed, classical_cutoff, lo, hi)
        for lo, hi in _split(reps, max(threads, 1) * 4)
    ]
    hits = t_hits = degenerate = 0
    for h, th, dg in _run_chunks(_coverage_chunk, argses, threads):
        hits += h
        t_hits += th
        degenerate += dg
    return CoverageReport(
        dist=d.label(), n=n, m=m, pivot=pivot_kind.value, reps=reps,
        alpha=alpha, sided=sided, coverage=hits / reps,
        classical_coverage=t_hits / reps, classical_cutoff=classical_cutoff,
        degenerate_count=degenerate, seed=seed,
    )


def _counts_matrix(n: int, m: int, rows: int, rng: np.random.Generator) -> np.ndarray:
    idx = rng.integers(0, n, size=(rows, m))
    flat = np.repeat(np.arange(rows, dtype=np.int64), m) * n + idx.ravel()
    return np.bincount(flat, minlength=rows * n).reshape(rows, n).astype(np.float64)


def _batch_values(kind: PivotKind, x: np.ndarray, w: np.ndarray, m: int,
                  mu: float) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized pivot values over rows; also a validity mask."""
    n = x.shape[1]
    dev = w / m - 1.0 / n
    ssq = np.einsum("ij,ij->i", dev, dev)
    if kind.uses_subsample_scale:
        rmean = (w * x).sum(axis=1) / m
        scale2 = (w * (x - rmean[:, None]) ** 2).sum(axis=1) / m
    else:
        scale2 = x.var(axis=1)
    if kind.needs_mu:
        num = (np.abs(dev) * (x - mu)).sum(axis=1)
    else:
        num = (dev * x).sum(axis=1)
    denom2 = scale2 * ssq
    valid = denom2 > 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        vals = num / np.sqrt(denom2)
    return vals, valid


def _batch_classical(x: np.ndarray, mu: float) -> tuple[np.ndarray, np.ndarray]:
    n = x.shape[1]
    s1 = x.std(axis=1, ddof=1)
    valid = s1 > 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (x.mean(axis=1) - mu) / (s1 / math.sqrt(n))
    return t, valid


def _proportion_chunk(args) -> tuple[int, int, int]:
    (d, n, m, kind, alpha, sided, band, seed, cutoff_kind, start, stop, inner) = args
    z = critical_z(alpha / 2.0 if sided == "two" else alpha)
    cutoff = _cutoff_value(cutoff_kind, alpha, sided, n)
    mu = d.true_mean
    lo, hi = band
    in_band = t_in_band = degenerate = 0
    for o in range(start, stop):
        rng = stream(seed, o)
        x = gen_sample(d, inner * n, rng).reshape(inner, n)
        w = _counts_matrix(n, m, inner, rng)
        vals, ok_v = _batch_values(kind, x, w, m, mu)
        tvals, ok_t = _batch_classical(x, mu)
        bad = ~(ok_v & ok_t)
        attempt = 0
        while bad.any():
            attempt += 1
            if attempt > MAX_REDRAWS:
                raise RandPivotError(f"outer replication {o}: too many degenerate draws")
            rng_b = stream(seed, o, attempt)
            nb = int(bad.sum())
            degenerate += nb
            x[bad] = gen_sample(d, nb * n, rng_b).reshape(nb, n)
            w[bad] = _counts_matrix(n, m, nb, rng_b)
            vals[bad], ok_v2 = _batch_values(kind, x[bad], w[bad], m, mu)
            tvals[bad], ok_t2 = _batch_classical(x[bad], mu)
            nxt = np.zeros_like(bad)
            nxt[bad] = ~(ok_v2 & ok_t2)
            bad = nxt

        if sided == "upper":
            cov = float((vals <= z).mean())
            t_cov = float((tvals <= cutoff).mean())
        elif sided == "lower":
            cov = float((vals >= -z).mean())
            t_cov = float((tvals >= -cutoff).mean())
        else:
            cov = float((np.abs(vals) <= z).mean())
            t_cov = float((np.abs(tvals) <= cutoff).mean())
        in_band += lo <= cov <= hi
        t_in_band += lo <= t_cov <= hi
    return in_band, t_in_band, degenerate


def proportion_study(d: DistributionSpec, n: int, pivot_kind: PivotKind,
                     outer_reps: int = 500, inner_reps: int = 500,
                     band: tuple[float, float] = (0.94, 0.96),
                     alpha: float = 0.05, seed: int = 0, m: int | None = None,
                     sided: str = "upper", classical_cutoff: str = "normal",
                     threads: int = 1) -> ProportionReport:
    """Fraction of outer replications whose inner coverage lands in band.

    Each outer replication o (stream (seed, o)) runs inner_reps fresh
    (sample, weights) pairs -- one weight draw per data replication -- and
    estimates a coverage probability; the report gives the fraction of
    those estimates inside the band, for the pivot and for the classical
    Student t comparator on the same data.
    """
    if outer_reps < 1 or inner_reps < 1:
        raise ValueError("outer_reps and inner_reps must be positive")
    pivot_kind = PivotKind(pivot_kind)
    m = n if m is None else m
    argses = [
        (d, n, m, pivot_kind, alpha, sided, tuple(band), seed, classical_cutoff,
         lo, hi, inner_reps)
        for lo, hi in _split(outer_reps, max(threads, 1) * 4)
    ]
    in_band = t_in_band = degenerate = 0
    for ib, tb, dg in _run_chunks(_proportion_chunk, argses, threads):
        in_band += ib
        t_in_band += tb
        degenerate += dg
    return ProportionReport(
        dist=d.label(), n=n, m=m, pivot=pivot_kind.value,
        outer_reps=outer_reps, inner_reps=inner_reps, alpha=alpha, sided=sided,
        band=(band[0], band[1]), proportion=in_band / outer_reps,
        classical_proportion=t_in_band / outer_reps,
        classical_cutoff=classical_cutoff, degenerate_count=degenerate,
        seed=seed,
    )


def _kdist_chunk(args) -> np.ndarray:
    (d, n, m, kind, seed, start, stop) = args
    out = np.empty(stop - start, dtype=np.float64)
    for r in range(start, stop):
        out[r - start], _, _ = _one_replication(d, n, m, kind, seed, r)
    return out


KDIST_GRID = np.linspace(-5.0, 5.0, 512)


def kolmogorov_distance(pivot_kind: PivotKind, d: DistributionSpec, n: int,
                        m: int, reps: int, seed: int = 0,
                        threads: int = 1) -> float:
    """Sup over a fixed 512-point grid of |ECDF(pivot values) - Phi|."""
    if reps < 1:
        raise ValueError("reps must be positive")
    pivot_kind = PivotKind(pivot_kind)
    argses = [(d, n, m, pivot_kind, seed, lo, hi)
              for lo, hi in _split(reps, max(threads, 1) * 4)]
    values = np.sort(np.concatenate(_run_chunks(_kdist_chunk, argses, threads)))
    ecdf = np.searchsorted(values, KDIST_GRID, side="right") / reps
    phi = np.array([norm_cdf(t) for t in KDIST_GRID])
    return float(np.max(np.abs(ecdf - phi)))


def to_json(report, timestamp: str | None = None) -> str:
    """Serialize one report (any dataclass with to_dict) to JSON."""
    payload = report.to_dict()
    if timestamp is not None:
        payload["timestamp"] = timestamp
    return json.dumps(payload, sort_keys=True)


def to_csv(reports: Iterable) -> str:
    """Serialize reports of one kind to CSV, one row per report."""
    reports = list(reports)
    if not reports:
        return ""
    rows = [r.to_dict() for r in reports]
    fields = list(rows[0].keys())
    lines = [",".join(fields)]
    for row in rows:
        lines.append(",".join(str(row[f]) for f in fields))
    return "\n".join(lines) + "\n"
