"""Experiment configuration: the one structured file the CLI consumes.

The schema is versioned; every run validates its topology, gate control
lists and streams before any event is processed.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from typing import Optional

import yaml

from . import bridge as bridge_mod
from .gating import GateControlList, GateWindow, GclBuildError, build_gcl
from .model import (
    DEFAULT_QUEUE_CAPACITY_BYTES,
    LinkSpec,
    Macrotick,
    NodeId,
    NodeSpec,
    StreamKind,
    StreamSpec,
    Topology,
    Violation,
    default_topology,
    validate_topology,
)

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class ExperimentConfig:
    topology: Topology
    streams: tuple[StreamSpec, ...]
    gcl_ms: Optional[GateControlList]
    gcl_sl: Optional[GateControlList]
    bridge: bridge_mod.BridgeDelayModel
    duration_ns: int
    seed: int
    macrotick: Macrotick = Macrotick()
    queue_capacity_ms_bytes: int = DEFAULT_QUEUE_CAPACITY_BYTES
    queue_capacity_sl_bytes: int = DEFAULT_QUEUE_CAPACITY_BYTES
    drain_ns: int = 100_000_000

    def validate(self) -> list[Violation]:
        out = list(validate_topology(self.topology))
        if self.duration_ns <= 0:
            out.append(Violation("BadDuration", f"duration {self.duration_ns} not positive"))
        if self.drain_ns < 0:
            out.append(Violation("BadDuration", "drain must be non-negative"))
        if self.queue_capacity_ms_bytes <= 0 or self.queue_capacity_sl_bytes <= 0:
            out.append(Violation("BadCapacity", "queue capacities must be positive"))
        if not self.streams:
            out.append(Violation("NoStreams", "at least one stream required"))
        pcps = [s.pcp for s in self.streams]
        if len(pcps) != len(set(pcps)):
            out.append(Violation("DuplicatePcp", "streams must use distinct pcp values"))
        for s in self.streams:
            try:
                self.bridge.variant_for(s.pcp)
            except bridge_mod.NoModelForPcp:
                out.append(Violation("NoModelForPcp", f"bridge has no delay model for pcp {s.pcp}"))
        return out

    def with_seed(self, seed: int) -> "ExperimentConfig":
        return replace(self, seed=seed)

    # -- serialization -------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "version": SCHEMA_VERSION,
            "seed": self.seed,
            "duration_ns": self.duration_ns,
            "drain_ns": self.drain_ns,
            "macrotick_ns": self.macrotick.ns,
            "queue_capacity_ms_bytes": self.queue_capacity_ms_bytes,
            "queue_capacity_sl_bytes": self.queue_capacity_sl_bytes,
            "topology": _topology_to_dict(self.topology),
            "streams": [_stream_to_dict(s) for s in self.streams],
            "gcl_ms": _gcl_to_dict(self.gcl_ms),
            "gcl_sl": _gcl_to_dict(self.gcl_sl),
            "bridge": _bridge_to_dict(self.bridge),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        version = data.get("version")
        if version != SCHEMA_VERSION:
            raise ValueError(f"unsupported config version {version!r}")
        macrotick = Macrotick(int(data.get("macrotick_ns", 16)))
        return cls(
            topology=_topology_from_dict(data["topology"]),
            streams=tuple(_stream_from_dict(s) for s in data["streams"]),
            gcl_ms=_gcl_from_dict(data.get("gcl_ms"), macrotick),
            gcl_sl=_gcl_from_dict(data.get("gcl_sl"), macrotick),
            bridge=_bridge_from_dict(data["bridge"]),
            duration_ns=int(data["duration_ns"]),
            seed=int(data["seed"]),
            macrotick=macrotick,
            queue_capacity_ms_bytes=int(data.get("queue_capacity_ms_bytes", DEFAULT_QUEUE_CAPACITY_BYTES)),
            queue_capacity_sl_bytes=int(data.get("queue_capacity_sl_bytes", DEFAULT_QUEUE_CAPACITY_BYTES)),
            drain_ns=int(data.get("drain_ns", 100_000_000)),
        )

    def dump_yaml(self, path):
        with open(path, "w") as f:
            yaml.safe_dump(self.to_dict(), f, sort_keys=True)

    @classmethod
    def load_yaml(cls, path) -> "ExperimentConfig":
        with open(path) as f:
            return cls.from_dict(yaml.safe_load(f))

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()


# -- helpers ----------------------------------------------------------------


def _topology_to_dict(topo: Topology) -> dict:
    return {
        "nodes": [{"id": n.id.value, "proc_delay_ns": n.proc_delay_ns} for n in topo.nodes],
        "links": [
            {"from": l.src.value, "to": l.dst.value,
             "bandwidth_bps": l.bandwidth_bps, "prop_delay_ns": l.prop_delay_ns}
            for l in topo.links
        ],
    }


def _topology_from_dict(data: dict) -> Topology:
    nodes = tuple(NodeSpec(NodeId(n["id"]), int(n.get("proc_delay_ns", 0))) for n in data["nodes"])
    links = tuple(
        LinkSpec(NodeId(l["from"]), NodeId(l["to"]),
                 int(l["bandwidth_bps"]), int(l.get("prop_delay_ns", 0)))
        for l in data["links"]
    )
    return Topology(nodes, links)


def _stream_to_dict(s: StreamSpec) -> dict:
    d = {"kind": s.kind.value, "pcp": s.pcp, "packet_len_bytes": s.packet_len_bytes}
    if s.kind == StreamKind.DC:
        d.update({"backlog": s.backlog})
        if s.burst_size is not None:
            d["burst_size"] = s.burst_size
        if s.app_cycle_ns is not None:
            d["app_cycle_ns"] = s.app_cycle_ns
        if s.delay_budget_ns is not None:
            d["delay_budget_ns"] = s.delay_budget_ns
    else:
        d["rate_bps"] = s.rate_bps
    return d


def _stream_from_dict(d: dict) -> StreamSpec:
    kind = StreamKind(d["kind"])
    if kind == StreamKind.DC:
        return StreamSpec.dc(
            pcp=int(d["pcp"]),
            packet_len_bytes=int(d["packet_len_bytes"]),
            burst_size=int(d["burst_size"]) if "burst_size" in d else None,
            app_cycle_ns=int(d["app_cycle_ns"]) if "app_cycle_ns" in d else None,
            delay_budget_ns=int(d["delay_budget_ns"]) if "delay_budget_ns" in d else None,
            backlog=bool(d.get("backlog", False)),
        )
    return StreamSpec.be(int(d["pcp"]), int(d["packet_len_bytes"]), int(d["rate_bps"]))


def _gcl_to_dict(gcl: Optional[GateControlList]) -> Optional[dict]:
    if gcl is None:
        return None
    return {
        "cycle_ns": gcl.cycle_ns,
        "base_offset_ns": gcl.base_offset_ns,
        "guard_band_ns": gcl.guard_band_ns,
        "windows": [
            {"pcp": w.pcp, "open_ns": w.open_ns, "close_ns": w.close_ns}
            for w in gcl.windows
        ],
    }


def _gcl_from_dict(data: Optional[dict], macrotick: Macrotick) -> Optional[GateControlList]:
    if data is None:
        return None
    windows = [GateWindow(int(w["pcp"]), int(w["open_ns"]), int(w["close_ns"]))
               for w in data["windows"]]
    return build_gcl(
        cycle_ns=int(data["cycle_ns"]),
        base_offset_ns=int(data.get("base_offset_ns", 0)),
        windows=windows,
        guard_band_ns=int(data.get("guard_band_ns", 0)),
        macrotick=macrotick,
    )


def _variant_to_dict(v) -> dict:
    if isinstance(v, bridge_mod.ConstantDelay):
        return {"variant": "constant", "delay_ns": v.delay_ns}
    if isinstance(v, bridge_mod.EmpiricalDelay):
        return {"variant": "empirical", "samples_ns": list(v.samples_ns)}
    if isinstance(v, bridge_mod.ShiftedLognormalDelay):
        return {
            "variant": "shifted_lognormal",
            "min_shift_ns": v.min_shift_ns,
            "mu": v.mu,
            "sigma": v.sigma,
            "max_ns": v.max_ns,
        }
    if isinstance(v, bridge_mod.TddAlignedDelay):
        return {
            "variant": "tdd_aligned",
            "slot_ns": v.slot_ns,
            "pattern": list(v.pattern),
            "base": _variant_to_dict(v.base),
        }
    raise TypeError(f"unknown bridge variant {type(v).__name__}")


def _variant_from_dict(d: dict):
    kind = d["variant"]
    if kind == "constant":
        return bridge_mod.ConstantDelay(int(d["delay_ns"]))
    if kind == "empirical":
        return bridge_mod.EmpiricalDelay(tuple(sorted(int(x) for x in d["samples_ns"])))
    if kind == "shifted_lognormal":
        max_ns = d.get("max_ns")
        return bridge_mod.ShiftedLognormalDelay(
            int(d["min_shift_ns"]), float(d["mu"]), float(d["sigma"]),
            int(max_ns) if max_ns is not None else None,
        )
    if kind == "tdd_aligned":
        return bridge_mod.TddAlignedDelay(
            _variant_from_dict(d["base"]), int(d["slot_ns"]), tuple(d["pattern"]),
        )
    if kind == "fitted_jitter":
        return bridge_mod.fitted_jitter_model()
    raise ValueError(f"unknown bridge variant {kind!r}")


def _bridge_to_dict(model: bridge_mod.BridgeDelayModel) -> dict:
    return {
        "in_order": model.in_order,
        "per_pcp": {str(p): _variant_to_dict(v) for p, v in model.per_pcp},
        "default": _variant_to_dict(model.default) if model.default is not None else None,
    }


def _bridge_from_dict(d: dict) -> bridge_mod.BridgeDelayModel:
    per_pcp = {int(p): _variant_from_dict(v) for p, v in (d.get("per_pcp") or {}).items()}
    default = _variant_from_dict(d["default"]) if d.get("default") else None
    return bridge_mod.BridgeDelayModel.for_pcps(per_pcp, default=default,
                                                in_order=bool(d.get("in_order", True)))
