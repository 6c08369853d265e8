import pytest

from qbvsim.analysis import (
    DistMode,
    EmptySeries,
    LatencySeries,
    detect_ici_jumps,
    distribution,
    join_probes,
    read_distribution_csv,
    read_probe_csv,
    summarize,
    write_cluster_csv,
    write_distribution_csv,
    write_probe_csv,
)
from qbvsim.planning import percentile_bound

MS = 1_000_000


class TestJoinProbes:
    def test_latency_subtraction(self):
        out = join_probes([(1, 0), (2, 10)], [(1, 5 * MS), (2, 5 * MS + 10)])
        assert out.seqs == (1, 2)
        assert out.values_ns == (5 * MS, 5 * MS)

    def test_losses_reported(self):
        out = join_probes([(1, 0), (2, 10)], [(1, 5 * MS)])
        assert out.seqs == (1,)
        assert out.losses == (2,)

    def test_identical_files_zero_latency(self):
        recs = [(1, 100), (2, 200)]
        out = join_probes(recs, recs)
        assert out.values_ns == (0, 0)

    def test_negative_excluded_not_raised(self):
        out = join_probes([(1, 100)], [(1, 50)])
        assert out.seqs == ()
        assert out.excluded_negative == (1,)

    def test_join_split_roundtrip(self):
        ms = [(i, i * 1000) for i in range(50)]
        sl = [(i, i * 1000 + 5 * MS) for i in range(50)]
        out = join_probes(ms, sl)
        assert out.losses == ()
        assert len(out) == 50
        # reconstruct the slave side from the join and re-join
        sl2 = [(s, m + d) for (s, m), d in zip(ms, out.values_ns)]
        assert join_probes(ms, sl2).values_ns == out.values_ns


class TestDistribution:
    def test_point_mass_step(self):
        series = LatencySeries((0,), (5 * MS,))
        pts = distribution(series, DistMode.CDF, 1000)
        assert pts[0] == (5 * MS, 1.0)

    def test_uniform_ccdf_counting(self):
        series = LatencySeries(tuple(range(100)),
                               tuple(i * MS for i in range(1, 101)))
        pts = dict(distribution(series, DistMode.CCDF, MS))
        assert pts[90 * MS] == pytest.approx(0.10)

    def test_cdf_plus_ccdf_is_one(self):
        series = LatencySeries(tuple(range(10)),
                               (3, 1, 4, 1, 5, 9, 2, 6, 5, 3))
        cdf = distribution(series, DistMode.CDF, 1)
        ccdf = distribution(series, DistMode.CCDF, 1)
        for (x1, y1), (x2, y2) in zip(cdf, ccdf):
            assert x1 == x2
            assert y1 + y2 == pytest.approx(1.0)

    def test_ccdf_non_increasing(self):
        series = LatencySeries(tuple(range(9)),
                               (5, 8, 2, 9, 4, 7, 1, 6, 3))
        ys = [y for _, y in distribution(series, DistMode.CCDF, 2)]
        assert all(a >= b for a, b in zip(ys, ys[1:]))

    def test_empty_raises(self):
        with pytest.raises(EmptySeries):
            distribution(LatencySeries((), ()), DistMode.CDF, 1000)


class TestDetectIciJumps:
    def test_single_cluster(self):
        series = LatencySeries(tuple(range(5)), (5 * MS,) * 5)
        out = detect_ici_jumps(series, 30 * MS)
        assert out["clusters"] == {0: 1.0}
        assert out["unclassified_fraction"] == 0.0

    def test_constructed_jump_fraction(self):
        # 993 on-time + 7 late by one cycle out of 1000
        values = [5 * MS] * 993 + [5 * MS + 30 * MS] * 7
        series = LatencySeries(tuple(range(1000)), tuple(values))
        out = detect_ici_jumps(series, 30 * MS)
        assert out["clusters"][0] == pytest.approx(0.993)
        assert out["clusters"][1] == pytest.approx(0.007)

    def test_short_cycle_three_windows(self):
        # delays spanning ~13 ms against a 6 ms cycle reach k=2
        t_c = 6 * MS
        values = [8 * MS] * 80 + [8 * MS + t_c] * 15 + [8 * MS + 2 * t_c] * 5
        series = LatencySeries(tuple(range(100)), tuple(values))
        out = detect_ici_jumps(series, t_c)
        assert set(out["clusters"]) == {0, 1, 2}

    def test_residual_tolerance(self):
        values = [5 * MS, 5 * MS + 10 * MS]  # 10 ms is no multiple of 30 ms
        series = LatencySeries((0, 1), tuple(values))
        out = detect_ici_jumps(series, 30 * MS)
        assert out["unclassified_fraction"] == pytest.approx(0.5)

    def test_fractions_sum_to_at_most_one(self):
        values = (5 * MS, 35 * MS, 40 * MS, 65 * MS)
        series = LatencySeries(tuple(range(4)), values)
        out = detect_ici_jumps(series, 30 * MS)
        assert sum(out["clusters"].values()) + out["unclassified_fraction"] == pytest.approx(1.0)


class TestSummarize:
    def test_basic_arithmetic(self):
        series = LatencySeries((0, 1, 2), (1 * MS, 2 * MS, 3 * MS))
        out = summarize(series)
        assert out["mean_ns"] == pytest.approx(2 * MS)
        assert out["max_ns"] == 3 * MS
        assert out["min_ns"] == 1 * MS

    def test_single_element_degenerate(self):
        series = LatencySeries((0,), (7 * MS,))
        out = summarize(series)
        assert {out["mean_ns"], out["min_ns"], out["max_ns"], out["p50_ns"],
                out["p99_ns"], out["p999_ns"]} == {7 * MS}

    def test_p999_matches_planner_convention(self):
        values = tuple(range(1, 5001))
        series = LatencySeries(tuple(range(5000)), values)
        assert summarize(series)["p999_ns"] == percentile_bound(list(values), 0.999)

    def test_empty_raises(self):
        with pytest.raises(EmptySeries):
            summarize(LatencySeries((), ()))


class TestCsvRoundTrips:
    def test_probe_roundtrip(self, tmp_path):
        p = tmp_path / "probe.csv"
        recs = [(0, 100), (1, 230), (2, 460)]
        write_probe_csv(p, recs)
        assert read_probe_csv(p) == recs
        assert p.read_text().splitlines()[0] == "seq,egress_ns"

    def test_probe_bad_header(self, tmp_path):
        p = tmp_path / "probe.csv"
        p.write_text("a,b\n1,2\n")
        with pytest.raises(ValueError):
            read_probe_csv(p)

    def test_distribution_roundtrip(self, tmp_path):
        p = tmp_path / "dist.csv"
        pts = [(1000, 0.25), (2000, 1.0)]
        write_distribution_csv(p, pts)
        assert read_distribution_csv(p) == pts

    def test_cluster_csv_header(self, tmp_path):
        p = tmp_path / "clusters.csv"
        write_cluster_csv(p, {0: 0.993, 1: 0.007})
        lines = p.read_text().splitlines()
        assert lines[0] == "k,fraction"
        assert lines[1] == "0,0.993"
