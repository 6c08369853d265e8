"""Measurement pipeline over probe dumps: per-packet latencies, empirical
distributions, cycle-jump clusters and summary statistics.

Probe CSV contract (bit-exact): header ``seq,egress_ns``, unsigned decimals.
Distribution CSV: ``x_ns,probability``.  Cluster CSV: ``k,fraction``.
"""

from __future__ import annotations

import csv
from bisect import bisect_right
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

from .planning import percentile_bound


class EmptySeries(Exception):
    pass


PROBE_HEADER = ["seq", "egress_ns"]
DISTRIBUTION_HEADER = ["x_ns", "probability"]
CLUSTER_HEADER = ["k", "fraction"]


@dataclass(frozen=True)
class LatencySeries:
    """Per-packet latency between the two probes, keyed by sequence number."""

    seqs: tuple[int, ...]
    values_ns: tuple[int, ...]
    losses: tuple[int, ...] = ()
    excluded_negative: tuple[int, ...] = ()
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.seqs)


def read_probe_csv(path) -> list[tuple[int, int]]:
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != PROBE_HEADER:
            raise ValueError(f"{path}: expected header {','.join(PROBE_HEADER)}")
        return [(int(seq), int(ts)) for seq, ts in reader]


def write_probe_csv(path, records: Iterable[tuple[int, int]]):
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(PROBE_HEADER)
        w.writerows(records)


def join_probes(ms: Sequence[tuple[int, int]], sl: Sequence[tuple[int, int]],
                meta: dict | None = None) -> LatencySeries:
    """Inner join on sequence number; latency is the timestamp difference.

    Master-side sequence numbers missing on the slave side are reported as
    losses.  Pairs with negative latency (clock misalignment in the input)
    are excluded and reported, not raised.
    """
    sl_by_seq = dict(sl)
    seqs, values, losses, negative = [], [], [], []
    for seq, ms_ts in sorted(ms):
        sl_ts = sl_by_seq.get(seq)
        if sl_ts is None:
            losses.append(seq)
            continue
        d = sl_ts - ms_ts
        if d < 0:
            negative.append(seq)
            continue
        seqs.append(seq)
        values.append(d)
    out_meta = dict(meta) if meta else {}
    ms_seqs = {seq for seq, _ in ms}
    out_meta["unmatched_sl"] = sorted(seq for seq, _ in sl if seq not in ms_seqs)
    return LatencySeries(tuple(seqs), tuple(values), tuple(losses),
                         tuple(negative), out_meta)


class DistMode(str, Enum):
    CDF = "CDF"
    CCDF = "CCDF"


def distribution(series: LatencySeries, mode: DistMode, grid_step_ns: int) -> list[tuple[int, float]]:
    """Empirical CDF or CCDF evaluated on a regular nanosecond grid."""
    if not series.values_ns:
        raise EmptySeries("no latency values")
    if grid_step_ns <= 0:
        raise ValueError("grid step must be positive")
    ordered = sorted(series.values_ns)
    n = len(ordered)
    lo = (ordered[0] // grid_step_ns) * grid_step_ns
    hi = ordered[-1]
    out = []
    x = lo
    while True:
        cdf = bisect_right(ordered, x) / n
        out.append((x, cdf if mode == DistMode.CDF else 1.0 - cdf))
        if x >= hi:
            break
        x += grid_step_ns
    return out


def detect_ici_jumps(series: LatencySeries, cycle_ns: int,
                     residual_tolerance_ns: int | None = None) -> dict:
    """Cluster latencies at integer cycle multiples above the on-time baseline.

    The baseline anchors at the minimum-latency cluster and is refined to that
    cluster's median.  Packets whose residual exceeds the tolerance (a quarter
    cycle by default) are counted as unclassified.
    """
    if not series.values_ns:
        raise EmptySeries("no latency values")
    if cycle_ns <= 0:
        raise ValueError("cycle must be positive")
    tol = residual_tolerance_ns if residual_tolerance_ns is not None else cycle_ns // 4
    values = sorted(series.values_ns)
    base = values[0]
    k0 = [v for v in values if v - base < tol]
    baseline = k0[len(k0) // 2]
    clusters: dict[int, int] = {}
    unclassified = 0
    for v in series.values_ns:
        k = round((v - baseline) / cycle_ns)
        if k < 0 or abs(v - baseline - k * cycle_ns) >= tol:
            unclassified += 1
            continue
        clusters[k] = clusters.get(k, 0) + 1
    n = len(series.values_ns)
    return {
        "baseline_ns": baseline,
        "clusters": {k: clusters[k] / n for k in sorted(clusters)},
        "unclassified_fraction": unclassified / n,
    }


def summarize(series: LatencySeries) -> dict:
    """Mean, extremes and order-statistic percentiles of a latency series."""
    if not series.values_ns:
        raise EmptySeries("no latency values")
    values = list(series.values_ns)
    return {
        "count": len(values),
        "mean_ns": sum(values) / len(values),
        "min_ns": min(values),
        "max_ns": max(values),
        "p50_ns": percentile_bound(values, 0.5),
        "p99_ns": percentile_bound(values, 0.99),
        "p999_ns": percentile_bound(values, 0.999),
    }


def write_distribution_csv(path, points: Sequence[tuple[int, float]]):
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(DISTRIBUTION_HEADER)
        for x, y in points:
            w.writerow([x, f"{y:.10g}"])


def read_distribution_csv(path) -> list[tuple[int, float]]:
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != DISTRIBUTION_HEADER:
            raise ValueError(f"{path}: expected header {','.join(DISTRIBUTION_HEADER)}")
        return [(int(x), float(y)) for x, y in reader]


def write_cluster_csv(path, clusters: dict[int, float]):
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(CLUSTER_HEADER)
        for k in sorted(clusters):
            w.writerow([k, f"{clusters[k]:.10g}"])
