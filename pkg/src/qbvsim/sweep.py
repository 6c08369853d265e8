"""Experiment sweeps and the three reference recipes.

fig4: throughput (window) sweep with shaping at the master switch only.
fig5: slave-offset sweep at a fixed 30 ms cycle and 46.5 us window.
fig6: network-cycle sweep at a fixed 20 ms offset with a 25% slave margin.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path

from . import bridge as bridge_mod
from .config import ExperimentConfig
from .engine import ConfigInvalid, simulate
from .gating import GateWindow, build_gcl
from .model import Macrotick, StreamSpec, default_topology
from .planning import window_for_rate
from .runio import atomic_write, write_run_outputs

MS = 1_000_000  # ns per millisecond

DC_PCP = 2
BE_PCP = 0
DC_LEN = 200
BE_LEN = 1500
BE_RATE = 30_000_000
LINK_BPS = 10**9
GUARD_NS = 12_000  # one MTU transmission time at 1 Gbps
DEFAULT_CYCLE_NS = 30 * MS


class UnknownPreset(Exception):
    pass


class SweepKind(str, Enum):
    WINDOW = "WindowSweep"
    OFFSET = "OffsetSweep"
    CYCLE = "CycleSweep"


@dataclass(frozen=True)
class SweepSpec:
    kind: SweepKind
    values: tuple[int, ...]
    base: ExperimentConfig
    sl_window_margin: float = 0.0
    keep_rate_bps: int = 1_550_000  # throughput held constant in a cycle sweep

    def __post_init__(self):
        if not self.values:
            raise ValueError("sweep needs at least one value")
        if list(self.values) != sorted(set(self.values)):
            raise ValueError("sweep values must be strictly increasing")


def _dual_gcl(cycle_ns: int, w_dc_ns: int, base_offset_ns: int, macrotick: Macrotick,
              guard_ns: int = GUARD_NS):
    """DC window at the cycle start, BE filling the rest up to the guard band."""
    windows = [GateWindow(DC_PCP, 0, w_dc_ns)]
    be_close = cycle_ns - guard_ns
    if be_close > w_dc_ns:
        windows.append(GateWindow(BE_PCP, w_dc_ns, be_close))
    return build_gcl(cycle_ns, base_offset_ns, windows, guard_ns, macrotick)


def _base_config(seed: int, duration_ns: int) -> ExperimentConfig:
    m = Macrotick()
    jitter = bridge_mod.fitted_jitter_model()
    return ExperimentConfig(
        topology=default_topology(),
        streams=(
            StreamSpec.dc(DC_PCP, DC_LEN, backlog=True),
            StreamSpec.be(BE_PCP, BE_LEN, BE_RATE),
        ),
        gcl_ms=None,
        gcl_sl=None,
        bridge=bridge_mod.BridgeDelayModel.uniform(jitter),
        duration_ns=duration_ns,
        seed=seed,
        macrotick=m,
    )


def preset(name: str, seed: int = 0, duration_ns: int = 60 * 1_000_000_000) -> SweepSpec:
    """The three reference sweeps; duration defaults to 60 s of simulated time."""
    base = _base_config(seed, duration_ns)
    if name == "fig4":
        rates = tuple(range(350_000, 1_550_001, 300_000))
        return SweepSpec(SweepKind.WINDOW, rates, base)
    if name == "fig5":
        offsets = tuple(range(5 * MS, 30 * MS + 1, 5 * MS))
        return SweepSpec(SweepKind.OFFSET, offsets, base)
    if name == "fig6":
        cycles = tuple(c * MS for c in (6, 8, 10, 12, 15, 30))
        return SweepSpec(SweepKind.CYCLE, cycles, base, sl_window_margin=0.25)
    raise UnknownPreset(name)


def config_for_value(spec: SweepSpec, index: int) -> ExperimentConfig:
    """Materialize the per-value config, with its derived seed."""
    value = spec.values[index]
    base = spec.base
    m = base.macrotick
    seed = base.seed + index
    if spec.kind == SweepKind.WINDOW:
        w = window_for_rate(value, DEFAULT_CYCLE_NS, LINK_BPS, m)
        gcl_ms = _dual_gcl(DEFAULT_CYCLE_NS, w, 0, m)
        # Shaping at the master only: the slave port stays ungated.
        return replace(base, gcl_ms=gcl_ms, gcl_sl=None, seed=seed)
    if spec.kind == SweepKind.OFFSET:
        w = window_for_rate(spec.keep_rate_bps, DEFAULT_CYCLE_NS, LINK_BPS, m)
        gcl_ms = _dual_gcl(DEFAULT_CYCLE_NS, w, 0, m)
        gcl_sl = _dual_gcl(DEFAULT_CYCLE_NS, w, value % DEFAULT_CYCLE_NS, m)
        return replace(base, gcl_ms=gcl_ms, gcl_sl=gcl_sl, seed=seed)
    # Cycle sweep: scale both windows to keep the throughput, pad the slave
    # window by the configured margin, keep the 20 ms offset.
    cycle = value
    delta = 20 * MS
    w_ms = window_for_rate(spec.keep_rate_bps, cycle, LINK_BPS, m)
    w_sl = m.quantize_up(int(w_ms * (1.0 + spec.sl_window_margin)))
    gcl_ms = _dual_gcl(cycle, w_ms, 0, m)
    gcl_sl = _dual_gcl(cycle, w_sl, delta % cycle, m)
    return replace(base, gcl_ms=gcl_ms, gcl_sl=gcl_sl, seed=seed)


def _run_label(spec: SweepSpec, index: int) -> str:
    return f"run_{index:02d}_{spec.kind.name.lower()}_{spec.values[index]}"


def _execute_one(config_dict: dict, outdir: str) -> dict:
    cfg = ExperimentConfig.from_dict(config_dict)
    result = simulate(cfg)
    write_run_outputs(result, outdir)
    return {"seed": cfg.seed}


def run_sweep(spec: SweepSpec, outdir, jobs: int = 1) -> dict:
    """Run every value, write per-run outputs plus a manifest; deterministic
    for a fixed base seed regardless of the job count."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    runs = []
    work = []
    for i, value in enumerate(spec.values):
        label = _run_label(spec, i)
        entry = {"index": i, "value": value, "label": label}
        try:
            cfg = config_for_value(spec, i)
            bad = cfg.validate()
            if bad:
                raise ConfigInvalid(bad)
        except (ConfigInvalid, ValueError) as exc:
            entry["error"] = str(exc)
            runs.append(entry)
            continue
        entry["seed"] = cfg.seed
        entry["config_hash"] = cfg.config_hash()
        runs.append(entry)
        work.append((cfg.to_dict(), str(outdir / label)))

    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            list(pool.map(_execute_one, *zip(*work)))
    else:
        for cfg_dict, rundir in work:
            _execute_one(cfg_dict, rundir)

    manifest = {
        "kind": spec.kind.value,
        "base_seed": spec.base.seed,
        "runs": runs,
    }
    atomic_write(outdir / "manifest.json",
                 lambda f: f.write(json.dumps(manifest, sort_keys=True, indent=2) + "\n"))
    return manifest
