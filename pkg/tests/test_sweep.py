import json

import pytest

from qbvsim.config import ExperimentConfig
from qbvsim.sweep import (
    SweepKind,
    SweepSpec,
    UnknownPreset,
    config_for_value,
    preset,
    run_sweep,
)

MS = 1_000_000
DC = 2


class TestPresets:
    def test_fig4_window_sweep(self):
        spec = preset("fig4")
        assert spec.kind == SweepKind.WINDOW
        assert spec.values == (350_000, 650_000, 950_000, 1_250_000, 1_550_000)

    def test_fig4_master_only_gating(self):
        spec = preset("fig4")
        for i in range(len(spec.values)):
            cfg = config_for_value(spec, i)
            assert cfg.gcl_ms is not None
            assert cfg.gcl_sl is None

    def test_fig4_window_widths(self):
        spec = preset("fig4")
        # exact widths 10.5/19.5/28.5/37.5/46.5 us, rounded up to the 16 ns tick
        expected_exact = (10_500, 19_500, 28_500, 37_500, 46_500)
        for i, exact in enumerate(expected_exact):
            cfg = config_for_value(spec, i)
            (w,) = cfg.gcl_ms.windows_for(DC)
            assert exact <= w.width_ns < exact + 16
            assert w.width_ns % 16 == 0

    def test_fig5_offset_sweep(self):
        spec = preset("fig5")
        assert spec.kind == SweepKind.OFFSET
        assert spec.values == tuple(d * MS for d in (5, 10, 15, 20, 25, 30))
        cfg = config_for_value(spec, 3)
        assert cfg.gcl_sl.base_offset_ns == 20 * MS

    def test_fig6_cycle_sweep_margin(self):
        spec = preset("fig6")
        assert spec.kind == SweepKind.CYCLE
        assert spec.values == tuple(c * MS for c in (6, 8, 10, 12, 15, 30))
        for i, cycle in enumerate(spec.values):
            cfg = config_for_value(spec, i)
            assert cfg.gcl_sl.cycle_ns == cycle
            (w_ms,) = cfg.gcl_ms.windows_for(DC)
            (w_sl,) = cfg.gcl_sl.windows_for(DC)
            assert w_sl.width_ns >= 1.25 * w_ms.width_ns - 16
            assert cfg.gcl_sl.base_offset_ns == (20 * MS) % cycle

    def test_fig6_keeps_throughput(self):
        spec = preset("fig6")
        for i, cycle in enumerate(spec.values):
            cfg = config_for_value(spec, i)
            (w_ms,) = cfg.gcl_ms.windows_for(DC)
            assert w_ms.width_ns * 10**9 >= spec.keep_rate_bps * cycle

    def test_unknown_preset(self):
        with pytest.raises(UnknownPreset):
            preset("fig7")

    def test_seeds_derived_per_index(self):
        spec = preset("fig5", seed=100)
        seeds = [config_for_value(spec, i).seed for i in range(6)]
        assert seeds == [100, 101, 102, 103, 104, 105]


class TestSweepSpec:
    def test_rejects_empty_values(self):
        base = preset("fig5").base
        with pytest.raises(ValueError):
            SweepSpec(SweepKind.OFFSET, (), base)

    def test_rejects_non_monotone(self):
        base = preset("fig5").base
        with pytest.raises(ValueError):
            SweepSpec(SweepKind.OFFSET, (10 * MS, 5 * MS), base)


class TestRunSweep:
    def test_outputs_and_manifest(self, tmp_path):
        spec = preset("fig5", seed=3, duration_ns=90 * MS)
        manifest = run_sweep(spec, tmp_path)
        assert len(manifest["runs"]) == 6
        on_disk = json.loads((tmp_path / "manifest.json").read_text())
        assert on_disk == manifest
        for run in manifest["runs"]:
            rundir = tmp_path / run["label"]
            assert (rundir / "summary.csv").exists()
            assert (rundir / "probe_ms_pcp2.csv").exists()
            assert (rundir / "probe_sl_pcp2.csv").exists()
            assert "config_hash" in run

    def test_parallel_matches_serial(self, tmp_path):
        spec = preset("fig5", seed=3, duration_ns=90 * MS)
        run_sweep(spec, tmp_path / "serial", jobs=1)
        run_sweep(spec, tmp_path / "parallel", jobs=3)
        serial = sorted(p.relative_to(tmp_path / "serial")
                        for p in (tmp_path / "serial").rglob("*.csv"))
        parallel = sorted(p.relative_to(tmp_path / "parallel")
                          for p in (tmp_path / "parallel").rglob("*.csv"))
        assert serial == parallel
        for rel in serial:
            assert ((tmp_path / "serial" / rel).read_bytes()
                    == (tmp_path / "parallel" / rel).read_bytes())

    def test_config_roundtrips_through_manifest_hash(self, tmp_path):
        spec = preset("fig4", seed=1, duration_ns=60 * MS)
        manifest = run_sweep(spec, tmp_path)
        for i, run in enumerate(manifest["runs"]):
            cfg = config_for_value(spec, i)
            assert run["config_hash"] == cfg.config_hash()
            assert ExperimentConfig.from_dict(cfg.to_dict()) == cfg
