"""Network model: nodes, links, streams and the constant per-hop delays.

All times are integer nanoseconds.  Transmission times round up so that a
16 ns macrotick schedule never under-provisions a frame.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

NS_PER_SEC = 10**9

DEFAULT_MACROTICK_NS = 16
DEFAULT_QUEUE_CAPACITY_BYTES = 6800
DEFAULT_LINK_BPS = 10**9


def ceil_div(a: int, b: int) -> int:
    return -(-a // b)


@dataclass(frozen=True)
class Macrotick:
    """Schedule time granularity of an egress port."""

    ns: int = DEFAULT_MACROTICK_NS

    def __post_init__(self):
        if self.ns <= 0:
            raise ValueError("macrotick must be positive")

    def is_aligned(self, t_ns: int) -> bool:
        return t_ns % self.ns == 0

    def quantize_up(self, t_ns: int) -> int:
        return ceil_div(t_ns, self.ns) * self.ns


class NodeId(str, Enum):
    MS = "MS"
    NW = "NW"
    DS = "DS"
    SL = "SL"
    TX = "TX"
    RX = "RX"


@dataclass(frozen=True)
class NodeSpec:
    id: NodeId
    proc_delay_ns: int = 0


@dataclass(frozen=True)
class LinkSpec:
    src: NodeId
    dst: NodeId
    bandwidth_bps: int = DEFAULT_LINK_BPS
    prop_delay_ns: int = 0


def tx_duration_ns(len_bytes: int, bandwidth_bps: int) -> int:
    """Wire occupancy of one frame: 8*len bits at the link rate, rounded up."""
    if len_bytes <= 0:
        raise ValueError("len_bytes must be positive")
    if bandwidth_bps <= 0:
        raise ValueError("bandwidth must be positive")
    return ceil_div(8 * len_bytes * NS_PER_SEC, bandwidth_bps)


def sending_delay(len_bytes: int, link: LinkSpec) -> int:
    """Propagation plus serialization delay for one frame over a link."""
    return link.prop_delay_ns + tx_duration_ns(len_bytes, link.bandwidth_bps)


PATH = (NodeId.MS, NodeId.NW, NodeId.DS, NodeId.SL)

# The NW->DS hop is the 5G bridge; it is modelled as a delay sampler, not a link.
_BRIDGE_HOP = (NodeId.NW, NodeId.DS)


@dataclass(frozen=True)
class Topology:
    nodes: tuple[NodeSpec, ...]
    links: tuple[LinkSpec, ...]

    def node(self, node_id: NodeId) -> Optional[NodeSpec]:
        for n in self.nodes:
            if n.id == node_id:
                return n
        return None

    def proc_delay(self, node_id: NodeId) -> int:
        n = self.node(node_id)
        return n.proc_delay_ns if n is not None else 0

    def link(self, src: NodeId, dst: NodeId) -> Optional[LinkSpec]:
        for l in self.links:
            if l.src == src and l.dst == dst:
                return l
        # Wired links are symmetric: fall back to the reverse direction.
        for l in self.links:
            if l.src == dst and l.dst == src:
                return LinkSpec(src, dst, l.bandwidth_bps, l.prop_delay_ns)
        return None


def default_topology(
    switch_proc_ns: int = 1000,
    translator_proc_ns: int = 0,
    bandwidth_bps: int = DEFAULT_LINK_BPS,
    prop_delay_ns: int = 0,
) -> Topology:
    """MS -> NW -> (5G) -> DS -> SL with 1 GbE wired hops by default.

    The measured switches carry a 1 us processing delay by default; the
    translators are pure pass-throughs.  Neither value is calibrated.
    """
    return Topology(
        nodes=(
            NodeSpec(NodeId.MS, switch_proc_ns),
            NodeSpec(NodeId.NW, translator_proc_ns),
            NodeSpec(NodeId.DS, translator_proc_ns),
            NodeSpec(NodeId.SL, switch_proc_ns),
        ),
        links=(
            LinkSpec(NodeId.MS, NodeId.NW, bandwidth_bps, prop_delay_ns),
            LinkSpec(NodeId.DS, NodeId.SL, bandwidth_bps, prop_delay_ns),
        ),
    )


@dataclass(frozen=True)
class Violation:
    kind: str
    detail: str

    def __str__(self):
        return f"{self.kind}: {self.detail}"


def validate_topology(topo: Topology) -> list[Violation]:
    """Structural checks; returns violations as data, never raises."""
    out: list[Violation] = []
    present = {n.id for n in topo.nodes}
    for node_id in PATH:
        if node_id not in present:
            out.append(Violation("MissingNode", f"path node {node_id.value} absent"))
    for n in topo.nodes:
        if n.proc_delay_ns < 0:
            out.append(Violation("BadProcDelay", f"{n.id.value} proc delay negative"))
    for a, b in zip(PATH, PATH[1:]):
        if (a, b) == _BRIDGE_HOP:
            continue
        link = topo.link(a, b)
        if link is None:
            out.append(Violation("PathBroken", f"no link {a.value}->{b.value}"))
        elif link.bandwidth_bps <= 0:
            out.append(Violation("BadBandwidth", f"{a.value}->{b.value} bandwidth {link.bandwidth_bps}"))
        elif link.prop_delay_ns < 0:
            out.append(Violation("BadPropDelay", f"{a.value}->{b.value} prop delay negative"))
    # Explicitly configured reverse directions must match the forward ones.
    seen = {(l.src, l.dst): l for l in topo.links}
    for (src, dst), l in seen.items():
        rev = seen.get((dst, src))
        if rev is not None and (rev.bandwidth_bps != l.bandwidth_bps or rev.prop_delay_ns != l.prop_delay_ns):
            out.append(Violation("LinkAsymmetry", f"{src.value}<->{dst.value} directions differ"))
    return out


class StreamKind(str, Enum):
    DC = "DC"
    BE = "BE"


@dataclass(frozen=True)
class StreamSpec:
    """Delay-critical burst stream or best-effort constant-rate stream."""

    kind: StreamKind
    pcp: int
    packet_len_bytes: int
    # DC fields
    burst_size: Optional[int] = None
    app_cycle_ns: Optional[int] = None
    delay_budget_ns: Optional[int] = None
    backlog: bool = False
    # BE field
    rate_bps: Optional[int] = None

    def __post_init__(self):
        if not 0 <= self.pcp <= 7:
            raise ValueError("pcp must be in 0..7")
        if self.packet_len_bytes <= 0:
            raise ValueError("packet length must be positive")
        if self.kind == StreamKind.DC:
            if not self.backlog:
                if self.burst_size is None or self.burst_size < 1:
                    raise ValueError("DC stream needs burst_size >= 1")
                if self.app_cycle_ns is None or self.app_cycle_ns <= 0:
                    raise ValueError("DC stream needs app_cycle_ns > 0")
        else:
            if self.rate_bps is None or self.rate_bps <= 0:
                raise ValueError("BE stream needs rate_bps > 0")

    @classmethod
    def dc(cls, pcp, packet_len_bytes, burst_size=None, app_cycle_ns=None,
           delay_budget_ns=None, backlog=False) -> "StreamSpec":
        return cls(StreamKind.DC, pcp, packet_len_bytes, burst_size=burst_size,
                   app_cycle_ns=app_cycle_ns, delay_budget_ns=delay_budget_ns,
                   backlog=backlog)

    @classmethod
    def be(cls, pcp, packet_len_bytes, rate_bps) -> "StreamSpec":
        return cls(StreamKind.BE, pcp, packet_len_bytes, rate_bps=rate_bps)

    def emit_interval_ns(self) -> int:
        """Spacing between emissions: app cycle for DC, one frame time for BE."""
        if self.kind == StreamKind.DC:
            if self.app_cycle_ns is None:
                raise ValueError("backlogged DC stream has no emission interval")
            return self.app_cycle_ns
        return ceil_div(8 * self.packet_len_bytes * NS_PER_SEC, self.rate_bps)


@dataclass(frozen=True)
class QueueSpec:
    pcp: int
    capacity_bytes: int = DEFAULT_QUEUE_CAPACITY_BYTES

    def __post_init__(self):
        if self.capacity_bytes <= 0:
            raise ValueError("queue capacity must be positive")
