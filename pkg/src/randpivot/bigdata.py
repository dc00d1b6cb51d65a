"""Out-of-core datasets and index-only subsampling.

Binary layout (documented in the README, bit-exact):

    magic "RPV1" (4 bytes) | version u32 LE | count u64 LE | count x f64 LE

Because the randomized mean and variance need only the records whose
weight is nonzero, a confidence interval for the full-data mean touches
m draws' worth of distinct records instead of all n.  The reader is
instrumented (records, bytes, read calls) so that frugality is checkable,
and fetches sorted offsets with adjacent records coalesced into single
reads within 4 KiB windows.
"""
from __future__ import annotations

import csv
import math
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from .bounds import rate
from .errors import (DatasetFormatError, DatasetTooSmall, NonFiniteValue,
                     ParseError, ZeroScale)
from .edf import ci_edf_from_stats, dkw_bound
from .intervals import ConfidenceInterval, SizingPolicy, ci_xbar, subsample_size
from .pivots import RandomizedStats, randomized_stats_from_nonzero
from .weights import draw_indices, stats_from_nonzero

__all__ = [
    "MAGIC", "VERSION", "HEADER_SIZE", "RECORD_SIZE", "MIN_RECORDS",
    "DatasetHandle", "IndexSample", "ReadStats", "SubsampleReport",
    "write_dataset", "open_dataset", "read_csv_column", "ingest_csv",
    "draw_index_sample", "bigdata_ci_mean", "bigdata_ci_edf",
]

MAGIC = b"RPV1"
VERSION = 1
HEADER_SIZE = 16
RECORD_SIZE = 8
COALESCE_WINDOW = 4096  # bytes; adjacent records within one window share a read
MIN_RECORDS = 16


@dataclass
class ReadStats:
    """I/O instrumentation for one fetch."""

    records_read: int = 0
    bytes_read: int = 0
    read_calls: int = 0


@dataclass(frozen=True)
class IndexSample:
    """Sparse multinomial draw: sorted distinct indices with counts."""

    indices: np.ndarray
    counts: np.ndarray
    m: int
    n: int

    def __post_init__(self):
        if int(self.counts.sum()) != self.m:
            raise ValueError("counts must sum to m")
        if self.indices.size and ((self.indices < 0).any() or (self.indices >= self.n).any()):
            raise ValueError("indices out of range")

    @property
    def distinct(self) -> int:
        return int(self.indices.size)


@dataclass(frozen=True)
class SubsampleReport:
    """What a big-data interval computation actually touched."""

    n: int
    m: int
    policy: str
    distinct_records: int
    records_read: int
    bytes_read: int
    read_calls: int
    rate_bound: float
    dkw: float | None = None

    def to_dict(self) -> dict[str, Any]:
        d = {
            "n": self.n, "m": self.m, "policy": self.policy,
            "distinct_records": self.distinct_records,
            "records_read": self.records_read,
            "bytes_read": self.bytes_read,
            "read_calls": self.read_calls,
            "rate_bound": self.rate_bound,
        }
        if self.dkw is not None:
            d["dkw"] = self.dkw
        return d


class DatasetHandle:
    """Read-only random access to a fixed-width binary dataset.

    The handle keeps no file descriptor open between fetches, so it can be
    shared freely across threads; every fetch opens its own cursor.
    """

    def __init__(self, path: str | Path, count: int):
        self.path = Path(path)
        self.count = count

    def read_records(self, indices: np.ndarray) -> tuple[np.ndarray, ReadStats]:
        """Fetch the records at sorted distinct indices.

        Returns the values in the given (ascending) order plus I/O stats.
        Seeks ascend through the file; records whose span from the current
        group's first record stays within one 4 KiB window are served by a
        single read.
        """
        indices = np.asarray(indices, dtype=np.int64)
        if indices.size == 0:
            return np.empty(0, dtype=np.float64), ReadStats()
        if (np.diff(indices) <= 0).any():
            raise ValueError("indices must be strictly increasing")
        if indices[0] < 0 or indices[-1] >= self.count:
            raise ValueError("index out of range")

        per_window = COALESCE_WINDOW // RECORD_SIZE
        values = np.empty(indices.size, dtype=np.float64)
        stats = ReadStats(records_read=int(indices.size))
        with open(self.path, "rb") as f:
            pos = 0
            while pos < indices.size:
                first = int(indices[pos])
                end = int(np.searchsorted(indices, first + per_window, side="left"))
                span = int(indices[end - 1]) - first + 1
                f.seek(HEADER_SIZE + first * RECORD_SIZE)
                raw = f.read(span * RECORD_SIZE)
                if len(raw) != span * RECORD_SIZE:
                    raise DatasetFormatError(f"{self.path}: truncated read")
                block = np.frombuffer(raw, dtype="<f8")
                values[pos:end] = block[indices[pos:end] - first]
                stats.bytes_read += len(raw)
                stats.read_calls += 1
                pos = end
        return values, stats


def write_dataset(values, dst: str | Path) -> DatasetHandle:
    """Write values to the binary format and return a handle."""
    values = np.asarray(values, dtype=np.float64)
    dst = Path(dst)
    with open(dst, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<I", VERSION))
        f.write(struct.pack("<Q", values.size))
        f.write(values.astype("<f8").tobytes())
    return DatasetHandle(dst, int(values.size))


def open_dataset(path: str | Path) -> DatasetHandle:
    """Validate the header and size of an existing dataset file."""
    path = Path(path)
    with open(path, "rb") as f:
        header = f.read(HEADER_SIZE)
    if len(header) != HEADER_SIZE or header[:4] != MAGIC:
        raise DatasetFormatError(f"{path}: bad magic or truncated header")
    version, = struct.unpack("<I", header[4:8])
    if version != VERSION:
        raise DatasetFormatError(f"{path}: unsupported version {version}")
    count, = struct.unpack("<Q", header[8:16])
    actual = path.stat().st_size
    expected = HEADER_SIZE + count * RECORD_SIZE
    if actual != expected:
        raise DatasetFormatError(f"{path}: size {actual} != expected {expected}")
    return DatasetHandle(path, int(count))


def read_csv_column(src: str | Path, column: str | int, header: bool = False,
                    delimiter: str = ",") -> np.ndarray:
    """Parse one CSV column into a float64 array.

    ``column`` is a 0-based position, or a name looked up in the header
    row (a name implies header=True).
    """
    src = Path(src)
    values: list[float] = []
    with open(src, newline="") as f:
        reader = csv.reader(f, delimiter=delimiter)
        col_idx: int | None = column if isinstance(column, int) else None
        first = True
        for row_no, row in enumerate(reader):
            if not row:
                continue
            if first:
                first = False
                if isinstance(column, str):
                    try:
                        col_idx = row.index(column)
                    except ValueError:
                        raise ParseError(row_no, f"no column named {column!r}") from None
                    continue
                if header:
                    continue
            cell = row[col_idx].strip() if col_idx < len(row) else ""
            try:
                v = float(cell)
            except ValueError:
                raise ParseError(row_no, cell) from None
            if not math.isfinite(v):
                raise NonFiniteValue(row_no, cell)
            values.append(v)
    return np.array(values, dtype=np.float64)


def ingest_csv(src: str | Path, column: str | int, dst: str | Path,
               header: bool = False, delimiter: str = ",") -> DatasetHandle:
    """Convert one CSV column to the binary format."""
    return write_dataset(read_csv_column(src, column, header, delimiter), dst)


def draw_index_sample(n: int, m: int, rng: np.random.Generator) -> IndexSample:
    """Sparse multinomial(m; 1/n, ..., 1/n) draw.

    Counts the same uniform index stream as weights.draw_weights, so the
    dense and sparse paths are interchangeable draw for draw.
    """
    idx = draw_indices(n, m, rng)
    indices, counts = np.unique(idx, return_counts=True)
    return IndexSample(indices=indices.astype(np.int64),
                       counts=counts.astype(np.int64), m=m, n=n)


def _prepare(h: DatasetHandle, policy: SizingPolicy,
             rng: np.random.Generator) -> tuple[IndexSample, np.ndarray, ReadStats]:
    if h.count < MIN_RECORDS:
        raise DatasetTooSmall(f"{h.count} records; need at least {MIN_RECORDS}")
    m = subsample_size(h.count, policy)
    sample = draw_index_sample(h.count, m, rng)
    values, stats = h.read_records(sample.indices)
    return sample, values, stats


def bigdata_ci_mean(h: DatasetHandle, alpha: float, policy: SizingPolicy,
                    rng: np.random.Generator,
                    sided: str = "two") -> tuple[ConfidenceInterval, SubsampleReport]:
    """Interval for the full-data mean, touching only the sub-sampled records."""
    sample, values, stats = _prepare(h, policy, rng)
    wstats = stats_from_nonzero(sample.counts, sample.n, sample.m)
    rmean, rvar = randomized_stats_from_nonzero(values, sample.counts, sample.m)
    if rvar == 0.0:
        raise ZeroScale("all fetched records are equal")
    ci = ci_xbar(RandomizedStats(rmean=rmean, rvar=rvar), wstats, alpha,
                 sided=sided, n=sample.n, m=sample.m)
    report = SubsampleReport(
        n=sample.n, m=sample.m, policy=str(policy),
        distinct_records=sample.distinct, records_read=stats.records_read,
        bytes_read=stats.bytes_read, read_calls=stats.read_calls,
        rate_bound=rate(sample.n, sample.m, "D"),
    )
    return ci, report


def bigdata_ci_edf(h: DatasetHandle, x: float, alpha: float, policy: SizingPolicy,
                   rng: np.random.Generator, sided: str = "two",
                   dkw_eps: float | None = None) -> tuple[ConfidenceInterval, SubsampleReport]:
    """Pointwise interval for the full-data EDF at x from the sub-sample.

    With a caller-supplied dkw_eps the report carries the uniform bound
    min(1, 2 exp(-2 n eps^2)) quantifying how far F_n can sit from F.
    """
    sample, values, stats = _prepare(h, policy, rng)
    wstats = stats_from_nonzero(sample.counts, sample.n, sample.m)
    f_mn = float((sample.counts * (values <= x)).sum()) / sample.m
    ci = ci_edf_from_stats(f_mn, wstats, x, alpha, sided=sided,
                           n=sample.n, m=sample.m)
    report = SubsampleReport(
        n=sample.n, m=sample.m, policy=str(policy),
        distinct_records=sample.distinct, records_read=stats.records_read,
        bytes_read=stats.bytes_read, read_calls=stats.read_calls,
        rate_bound=rate(sample.n, sample.m, "D"),
        dkw=None if dkw_eps is None else dkw_bound(sample.n, dkw_eps),
    )
    return ci, report
