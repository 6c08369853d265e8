"""Command-line entry point: plan, simulate, analyze, sweep.

Exit codes: 0 success, 1 validation failure, 2 I/O failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import yaml

from . import analysis, planning, sweep as sweep_mod
from .config import ExperimentConfig
from .engine import ConfigInvalid, simulate
from .gating import GclBuildError
from .model import Macrotick
from .runio import write_run_outputs

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_IO = 2


def _read_samples(path) -> list[int]:
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames is None or "delay_ns" not in reader.fieldnames:
            raise ValueError(f"{path}: expected a 'delay_ns' column")
        return [int(row["delay_ns"]) for row in reader]


def _cmd_plan(args) -> int:
    try:
        samples = _read_samples(args.samples)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID

    inputs = planning.PlanInputs(
        app_cycles_ns=tuple(args.app_cycle_ns),
        dc_burst_size=args.dc_burst,
        dc_packet_len_bytes=args.dc_len,
        dc_delay_budget_ns=args.dc_budget_ns,
        be_rate_bps=args.be_rate,
        be_packet_len_bytes=args.be_len,
        bottleneck_bps=args.bandwidth,
        k_ns=args.k_ns,
        jitter_samples_ns=tuple(samples),
        percentile=args.percentile,
    )
    try:
        plan = planning.make_plan(
            inputs,
            guard_band_ns=args.guard_ns,
            sl_window_margin=args.margin,
            macrotick=Macrotick(args.macrotick_ns),
        )
    except (planning.EmptyInput, planning.BadPercentile, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID

    violations = planning.validate_plan(plan, inputs)
    doc = plan.to_dict()
    doc["violations"] = [str(v) for v in violations]
    text = yaml.safe_dump(doc, sort_keys=True)
    if args.out:
        try:
            with open(args.out, "w") as f:
                f.write(text)
        except OSError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_IO
    else:
        sys.stdout.write(text)
    if violations:
        for v in violations:
            print(f"violation: {v}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


def _cmd_simulate(args) -> int:
    try:
        cfg = ExperimentConfig.load_yaml(args.config)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, GclBuildError, KeyError, yaml.YAMLError) as exc:
        print(f"error: invalid config: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    try:
        result = simulate(cfg)
    except ConfigInvalid as exc:
        print(f"error: invalid config: {exc}", file=sys.stderr)
        return EXIT_INVALID
    try:
        write_run_outputs(result, args.out)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"delivered {result.delivered_count()} packets, "
          f"dropped {result.dropped_count()}, outputs in {args.out}")
    return EXIT_OK


def _cmd_analyze(args) -> int:
    try:
        ms = analysis.read_probe_csv(args.ms)
        sl = analysis.read_probe_csv(args.sl)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID

    series = analysis.join_probes(ms, sl)
    if not series.values_ns:
        print("error: no matching probe records", file=sys.stderr)
        return EXIT_INVALID
    report = {
        "summary": analysis.summarize(series),
        "losses": len(series.losses),
        "excluded_negative": len(series.excluded_negative),
    }
    if args.cycle_ns:
        report["ici"] = analysis.detect_ici_jumps(series, args.cycle_ns)
        if args.clusters_out:
            try:
                analysis.write_cluster_csv(args.clusters_out, report["ici"]["clusters"])
            except OSError as exc:
                print(f"error: {exc}", file=sys.stderr)
                return EXIT_IO
    json.dump(report, sys.stdout, indent=2, sort_keys=True)
    print()
    return EXIT_OK


def _cmd_sweep(args) -> int:
    try:
        spec = sweep_mod.preset(args.preset, seed=args.seed,
                                duration_ns=args.duration_ns)
    except sweep_mod.UnknownPreset as exc:
        print(f"error: unknown preset {exc}", file=sys.stderr)
        return EXIT_INVALID
    try:
        manifest = sweep_mod.run_sweep(spec, args.out, jobs=args.jobs)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    failed = [r for r in manifest["runs"] if "error" in r]
    for r in failed:
        print(f"run {r['label']} failed: {r['error']}", file=sys.stderr)
    print(f"{len(manifest['runs']) - len(failed)}/{len(manifest['runs'])} runs "
          f"completed, outputs in {args.out}")
    return EXIT_INVALID if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qbvsim",
                                description="Gated-network simulator and schedule planner")
    sub = p.add_subparsers(dest="command", required=True)

    pp = sub.add_parser("plan", help="derive a schedule from jitter samples")
    pp.add_argument("--samples", required=True, help="CSV with a delay_ns column")
    pp.add_argument("--percentile", type=float, default=0.999)
    pp.add_argument("--app-cycle-ns", type=int, action="append", required=True,
                    help="application cycle in ns; repeatable")
    pp.add_argument("--dc-burst", type=int, default=6)
    pp.add_argument("--dc-len", type=int, default=200)
    pp.add_argument("--dc-budget-ns", type=int, default=None)
    pp.add_argument("--be-rate", type=int, default=30_000_000)
    pp.add_argument("--be-len", type=int, default=1500)
    pp.add_argument("--bandwidth", type=int, default=10**9)
    pp.add_argument("--k-ns", type=int, required=True,
                    help="constant wired-path delay in ns")
    pp.add_argument("--guard-ns", type=int, default=12000)
    pp.add_argument("--margin", type=float, default=0.0,
                    help="extra fractional width on the burst window")
    pp.add_argument("--macrotick-ns", type=int, default=16)
    pp.add_argument("--out", default=None, help="write the plan YAML here")
    pp.set_defaults(func=_cmd_plan)

    ps = sub.add_parser("simulate", help="run one experiment config")
    ps.add_argument("--config", required=True, help="experiment YAML")
    ps.add_argument("--out", required=True, help="output directory")
    ps.add_argument("--seed", type=int, default=None, help="override the config seed")
    ps.set_defaults(func=_cmd_simulate)

    pa = sub.add_parser("analyze", help="join two probe CSVs and summarize")
    pa.add_argument("--ms", required=True, help="master-side probe CSV")
    pa.add_argument("--sl", required=True, help="slave-side probe CSV")
    pa.add_argument("--cycle-ns", type=int, default=None,
                    help="network cycle for jump clustering")
    pa.add_argument("--clusters-out", default=None, help="write cluster CSV here")
    pa.set_defaults(func=_cmd_analyze)

    pw = sub.add_parser("sweep", help="run a preset experiment sweep")
    pw.add_argument("--preset", required=True, choices=["fig4", "fig5", "fig6"])
    pw.add_argument("--out", required=True, help="output directory")
    pw.add_argument("--jobs", type=int, default=1)
    pw.add_argument("--seed", type=int, default=0)
    pw.add_argument("--duration-ns", type=int, default=60 * 10**9,
                    help="simulated time per run")
    pw.set_defaults(func=_cmd_sweep)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
