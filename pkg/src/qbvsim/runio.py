"""Deterministic on-disk layout for run results.

Per run: one probe CSV per measurement point and pcp, a run summary CSV,
and CDF/CCDF CSVs for each stream.  All files are written atomically.
"""

from __future__ import annotations

import csv
import os
import tempfile
from pathlib import Path

from .analysis import DistMode, LatencySeries, distribution, join_probes
from .engine import RunResult

SUMMARY_HEADER = [
    "pcp", "emitted", "delivered", "dropped_ms", "dropped_sl",
    "max_occupancy_ms_bytes", "max_occupancy_sl_bytes", "k_ns", "seed",
]


def atomic_write(path: Path, write_fn):
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as f:
            write_fn(f)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def probe_filename(point: str, pcp: int) -> str:
    return f"probe_{point.lower()}_pcp{pcp}.csv"


def latency_series(result: RunResult, pcp: int) -> LatencySeries:
    ms = result.probes.get(("MS", pcp), {"seq": [], "egress_ns": []})
    sl = result.probes.get(("SL", pcp), {"seq": [], "egress_ns": []})
    return join_probes(
        list(zip(ms["seq"], ms["egress_ns"])),
        list(zip(sl["seq"], sl["egress_ns"])),
        meta={"cycle_ns": result.cycle_ns, "seed": result.seed},
    )


def write_run_outputs(result: RunResult, outdir, dist_grid_ns: int = 50_000) -> dict:
    """Write probe, summary and distribution CSVs; returns relative paths."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    files = []

    for (point, pcp), rec in sorted(result.probes.items()):
        name = probe_filename(point, pcp)

        def write_probes(f, rec=rec):
            w = csv.writer(f)
            w.writerow(["seq", "egress_ns"])
            w.writerows(zip(rec["seq"], rec["egress_ns"]))

        atomic_write(outdir / name, write_probes)
        files.append(name)

    def write_summary(f):
        w = csv.writer(f)
        w.writerow(SUMMARY_HEADER)
        for pcp in sorted(result.emitted):
            delivered = len(result.delivered.get(pcp, {"seq": []})["seq"])
            w.writerow([
                pcp,
                result.emitted[pcp],
                delivered,
                result.ms_stats.drops.get(pcp, 0),
                result.sl_stats.drops.get(pcp, 0),
                result.ms_stats.max_occupancy_bytes.get(pcp, 0),
                result.sl_stats.max_occupancy_bytes.get(pcp, 0),
                result.k_by_pcp.get(pcp, 0),
                result.seed,
            ])

    atomic_write(outdir / "summary.csv", write_summary)
    files.append("summary.csv")

    for pcp in sorted(result.delivered):
        series = latency_series(result, pcp)
        if not series.values_ns:
            continue
        for mode, name in ((DistMode.CDF, f"cdf_pcp{pcp}.csv"),
                           (DistMode.CCDF, f"ccdf_pcp{pcp}.csv")):
            points = distribution(series, mode, dist_grid_ns)
            atomic_write(outdir / name, lambda f, p=points: _write_dist(f, p))
            files.append(name)

    return {"files": files}


def _write_dist(f, points):
    w = csv.writer(f)
    w.writerow(["x_ns", "probability"])
    for x, y in points:
        w.writerow([x, f"{y:.10g}"])
