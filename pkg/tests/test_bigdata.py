"""Tests for the binary dataset format, sparse subsampling, and big-data CIs."""
import math

import numpy as np
import pytest

from randpivot import (DatasetFormatError, DatasetTooSmall, NonFiniteValue,
                       ParseError, ZeroScale, bigdata_ci_edf, bigdata_ci_mean,
                       ci_xbar, draw_index_sample, draw_weights, ingest_csv,
                       open_dataset, randomized_stats, read_csv_column, stream,
                       weight_stats, write_dataset)
from randpivot.bigdata import RECORD_SIZE
from randpivot.intervals import Fixed, PowerDelta


class TestBinaryFormat:
    def test_round_trip(self, tmp_path):
        csv = tmp_path / "in.csv"
        csv.write_text("1.5\n2.5\n3.5\n")
        h = ingest_csv(csv, 0, tmp_path / "out.rpv")
        assert h.count == 3
        assert (tmp_path / "out.rpv").stat().st_size == 40
        values, stats = h.read_records(np.array([1]))
        assert values.tolist() == [2.5]
        assert stats.records_read == 1

    def test_reopen_validates(self, tmp_path):
        write_dataset([1.0, 2.0, 3.0], tmp_path / "d.rpv")
        h = open_dataset(tmp_path / "d.rpv")
        assert h.count == 3

    def test_bad_magic(self, tmp_path):
        p = tmp_path / "bad.rpv"
        p.write_bytes(b"NOPE" + bytes(12))
        with pytest.raises(DatasetFormatError):
            open_dataset(p)

    def test_truncated_file(self, tmp_path):
        p = tmp_path / "short.rpv"
        write_dataset([1.0, 2.0, 3.0], p)
        p.write_bytes(p.read_bytes()[:-4])
        with pytest.raises(DatasetFormatError):
            open_dataset(p)

    def test_empty_csv_gives_zero_count_then_too_small(self, tmp_path):
        csv = tmp_path / "empty.csv"
        csv.write_text("")
        h = ingest_csv(csv, 0, tmp_path / "e.rpv")
        assert h.count == 0
        with pytest.raises(DatasetTooSmall):
            bigdata_ci_mean(h, 0.05, Fixed(5), stream(0))

    def test_nan_rejected(self, tmp_path):
        csv = tmp_path / "nan.csv"
        csv.write_text("1.0\nNaN\n2.0\n")
        with pytest.raises(NonFiniteValue):
            ingest_csv(csv, 0, tmp_path / "x.rpv")

    def test_parse_error_carries_row(self, tmp_path):
        csv = tmp_path / "bad.csv"
        csv.write_text("1.0\nhello\n")
        with pytest.raises(ParseError) as err:
            ingest_csv(csv, 0, tmp_path / "x.rpv")
        assert err.value.row == 1

    def test_header_and_named_column(self, tmp_path):
        csv = tmp_path / "named.csv"
        csv.write_text("id;value\n1;10.5\n2;20.5\n")
        vals = read_csv_column(csv, "value", delimiter=";")
        assert vals.tolist() == [10.5, 20.5]
        vals = read_csv_column(csv, 1, header=True, delimiter=";")
        assert vals.tolist() == [10.5, 20.5]


class TestIndexSample:
    def test_single_category(self):
        s = draw_index_sample(1, 7, stream(0))
        assert s.indices.tolist() == [0]
        assert s.counts.tolist() == [7]

    def test_deterministic(self):
        a = draw_index_sample(1000, 500, stream(42, 3))
        b = draw_index_sample(1000, 500, stream(42, 3))
        assert (a.indices == b.indices).all() and (a.counts == b.counts).all()

    def test_indices_sorted_strictly_increasing(self):
        s = draw_index_sample(5000, 2000, stream(1))
        assert (np.diff(s.indices) > 0).all()
        assert int(s.counts.sum()) == 2000

    def test_matches_dense_draw(self):
        sparse = draw_index_sample(100, 250, stream(9, 9))
        dense = draw_weights(100, 250, stream(9, 9))
        assert (np.flatnonzero(dense.counts) == sparse.indices).all()
        assert (dense.counts[sparse.indices] == sparse.counts).all()

    def test_distinct_count_near_expectation(self):
        n, m = 10**6, 31623
        s = draw_index_sample(n, m, stream(2024))
        p1 = (1.0 - 1.0 / n) ** m
        p2 = (1.0 - 2.0 / n) ** m
        expected = n * (1.0 - p1)
        # occupancy variance: Var(distinct) = n p1 (1-p1) + n(n-1)(p2 - p1^2)
        var = n * p1 * (1 - p1) + n * (n - 1) * (p2 - p1 * p1)
        assert abs(s.distinct - expected) < 3.0 * math.sqrt(var)
        assert expected == pytest.approx(31128, abs=5)


class TestBigdataCiMean:
    def test_equivalence_with_in_memory_path(self, tmp_path):
        # same seed: the file route and the dense in-memory route agree bitwise
        n = 10**4
        rng = stream(77)
        data = rng.normal(3.0, 2.0, size=n)
        h = write_dataset(data, tmp_path / "d.rpv")

        ci_file, report = bigdata_ci_mean(h, 0.05, PowerDelta(0.25), stream(5, 1))
        w = draw_weights(n, report.m, stream(5, 1))
        ci_mem = ci_xbar(randomized_stats(data, w), weight_stats(w), 0.05,
                         n=n, m=report.m)
        assert ci_file.lower == ci_mem.lower
        assert ci_file.upper == ci_mem.upper
        assert ci_file.center == ci_mem.center
        assert ci_file.half_width == ci_mem.half_width

    def test_io_frugality_and_report(self, tmp_path):
        n = 50_000
        rng = stream(88)
        h = write_dataset(rng.normal(size=n), tmp_path / "d.rpv")
        ci, report = bigdata_ci_mean(h, 0.05, PowerDelta(0.25), stream(6))
        assert report.records_read == report.distinct_records
        assert report.records_read < n
        assert report.read_calls <= report.distinct_records
        assert report.bytes_read >= report.records_read * RECORD_SIZE
        assert report.rate_bound > 0

    def test_constant_dataset_zero_scale(self, tmp_path):
        h = write_dataset(np.full(100, 7.0), tmp_path / "c.rpv")
        with pytest.raises(ZeroScale):
            bigdata_ci_mean(h, 0.05, Fixed(50), stream(0))

    def test_too_small(self, tmp_path):
        h = write_dataset(np.arange(10.0), tmp_path / "s.rpv")
        with pytest.raises(DatasetTooSmall):
            bigdata_ci_mean(h, 0.05, Fixed(5), stream(0))


class TestReadPattern:
    def test_reads_ascend_and_coalesce(self, tmp_path):
        n = 4096
        h = write_dataset(np.arange(float(n)), tmp_path / "d.rpv")
        idx = np.array([0, 1, 2, 600, 601, 4000])
        values, stats = h.read_records(idx)
        assert values.tolist() == [0.0, 1.0, 2.0, 600.0, 601.0, 4000.0]
        # 0..2 coalesce (one read), 600..601 coalesce, 4000 alone
        assert stats.read_calls == 3
        assert stats.records_read == 6
        assert stats.bytes_read == (3 * 8) + (2 * 8) + 8

    def test_wide_gap_splits_reads(self, tmp_path):
        h = write_dataset(np.arange(2000.0), tmp_path / "d.rpv")
        per_window = 4096 // RECORD_SIZE
        idx = np.array([0, per_window - 1])   # still one window
        _, stats = h.read_records(idx)
        assert stats.read_calls == 1
        idx = np.array([0, per_window])       # crosses the window
        _, stats = h.read_records(idx)
        assert stats.read_calls == 2

    def test_requires_sorted_unique(self, tmp_path):
        h = write_dataset(np.arange(100.0), tmp_path / "d.rpv")
        with pytest.raises(ValueError):
            h.read_records(np.array([3, 3]))
        with pytest.raises(ValueError):
            h.read_records(np.array([5, 2]))


class TestBigdataCiEdf:
    def test_runs_and_reports_dkw(self, tmp_path):
        n = 20_000
        rng = stream(99)
        h = write_dataset(rng.normal(size=n), tmp_path / "d.rpv")
        ci, report = bigdata_ci_edf(h, 0.0, 0.05, Fixed(1000), stream(7), dkw_eps=0.002)
        assert 0.0 <= ci.lower <= ci.upper <= 1.0
        assert abs(ci.center - 0.5) < 0.1
        assert report.dkw == pytest.approx(min(1.0, 2.0 * math.exp(-2 * n * 0.002**2)), rel=1e-12)
        assert report.records_read == report.distinct_records

    def test_x_outside_range_zero_scale(self, tmp_path):
        h = write_dataset(np.arange(100.0), tmp_path / "d.rpv")
        with pytest.raises(ZeroScale):
            bigdata_ci_edf(h, -5.0, 0.05, Fixed(50), stream(0))

    def test_width_scales_like_one_over_sqrt_m(self, tmp_path):
        # half width ~ z * sqrt(F(1-F)) * sqrt((1-1/n)/m): m = 1000 on a big
        # file gives width on the 1/sqrt(1000) scale
        n = 10**5
        rng = stream(111)
        h = write_dataset(rng.uniform(size=n), tmp_path / "d.rpv")
        ci, _ = bigdata_ci_edf(h, 0.5, 0.05, Fixed(1000), stream(8))
        want = 1.959964 * 0.5 * math.sqrt(1.0 / 1000)
        assert ci.half_width == pytest.approx(want, rel=0.15)
