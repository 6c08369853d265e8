"""Deterministic discrete-event engine.

Packets travel MS -> NW -> (5G bridge) -> DS -> SL; the two switches apply
802.1Qbv gating at their egress ports and the probes stamp the transmission
start instant at each of them.  Event ordering is (time, insertion ordinal),
so identical configs and seeds replay identically.
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import gating
from .bridge import BridgeDelayModel, sample_delay
from .model import (
    NodeId,
    StreamKind,
    StreamSpec,
    Topology,
    sending_delay,
    tx_duration_ns,
)


class MissingLink(Exception):
    pass


class InsufficientData(Exception):
    pass


class ConfigInvalid(Exception):
    def __init__(self, violations):
        super().__init__("; ".join(str(v) for v in violations))
        self.violations = list(violations)


def compute_K(topo: Topology, len_bytes: int) -> int:
    """Constant part of the measured delay: both wired sending delays plus
    the slave switch's processing delay."""
    ms_nw = topo.link(NodeId.MS, NodeId.NW)
    ds_sl = topo.link(NodeId.DS, NodeId.SL)
    if ms_nw is None:
        raise MissingLink("MS->NW")
    if ds_sl is None:
        raise MissingLink("DS->SL")
    return sending_delay(len_bytes, ms_nw) + sending_delay(len_bytes, ds_sl) + topo.proc_delay(NodeId.SL)


@dataclass
class PortStats:
    drops: dict[int, int] = field(default_factory=dict)
    max_occupancy_bytes: dict[int, int] = field(default_factory=dict)


@dataclass
class RunResult:
    """Everything a run produces, in plain lists for cheap serialization."""

    # (point, pcp) -> parallel lists of sequence numbers and egress timestamps
    probes: dict[tuple[str, int], dict[str, list[int]]]
    # pcp -> columns for delivered packets (stamped at both probes)
    delivered: dict[int, dict[str, list[int]]]
    ms_stats: PortStats
    sl_stats: PortStats
    emitted: dict[int, int]
    queued_at_end: int
    in_transit_at_end: int
    k_by_pcp: dict[int, int]
    seed: int
    cycle_ns: Optional[int]
    sl_base_offset_ns: int
    duration_ns: int

    def delivered_count(self) -> int:
        return sum(len(cols["seq"]) for cols in self.delivered.values())

    def dropped_count(self) -> int:
        return sum(self.ms_stats.drops.values()) + sum(self.sl_stats.drops.values())

    def d_emp(self, pcp: int) -> list[int]:
        cols = self.delivered.get(pcp)
        if not cols:
            return []
        return [s - m for m, s in zip(cols["probe_ms"], cols["probe_sl"])]

    def conservation_holds(self) -> bool:
        total = sum(self.emitted.values())
        return total == (
            self.delivered_count()
            + self.queued_at_end
            + self.in_transit_at_end
            + self.dropped_count()
        )


def measure_departure_jitter(result: RunResult, pcp: int, cycle_ns: Optional[int] = None) -> int:
    """Spread of on-time slave-egress instants within the network cycle.

    On-time packets are those in the lowest latency cluster (within a quarter
    cycle of the minimum).  Zero means the shaper re-timed every departure to
    the same cycle-relative instant.
    """
    t_c = cycle_ns if cycle_ns is not None else result.cycle_ns
    if t_c is None:
        raise ValueError("no cycle known for this run; pass cycle_ns")
    cols = result.delivered.get(pcp)
    if cols is None or len(cols["seq"]) < 2:
        raise InsufficientData(f"need at least 2 delivered packets for pcp {pcp}")
    d = [s - m for m, s in zip(cols["probe_ms"], cols["probe_sl"])]
    d_min = min(d)
    phases = [
        ts % t_c
        for ts, di in zip(cols["probe_sl"], d)
        if di - d_min < t_c // 4
    ]
    if len(phases) < 2:
        raise InsufficientData(f"fewer than 2 on-time packets for pcp {pcp}")
    return max(phases) - min(phases)


# Event kinds, dispatched in the main loop.
_EMIT, _ENQ_MS, _ENQ_SL, _TRY, _TXDONE = 0, 1, 2, 3, 4


class _Pkt:
    __slots__ = ("seq", "pcp", "length", "created", "probe_ms", "probe_sl", "d5g", "enq_sl")

    def __init__(self, seq, pcp, length, created):
        self.seq = seq
        self.pcp = pcp
        self.length = length
        self.created = created
        self.probe_ms = -1
        self.probe_sl = -1
        self.d5g = -1
        self.enq_sl = -1


class _Port:
    __slots__ = ("name", "gcl", "link", "capacity", "queues", "qbytes", "busy_until",
                 "next_try", "stats")

    def __init__(self, name, gcl, link, capacity_bytes):
        self.name = name
        self.gcl = gcl
        self.link = link
        self.capacity = capacity_bytes
        self.queues: dict[int, deque] = {}
        self.qbytes: dict[int, int] = {}
        self.busy_until = 0
        self.next_try: Optional[int] = None
        self.stats = PortStats()

    def enqueue(self, pkt: _Pkt) -> bool:
        q = self.queues.get(pkt.pcp)
        if q is None:
            q = self.queues[pkt.pcp] = deque()
            self.qbytes[pkt.pcp] = 0
        if self.qbytes[pkt.pcp] + pkt.length > self.capacity:
            self.stats.drops[pkt.pcp] = self.stats.drops.get(pkt.pcp, 0) + 1
            return False
        q.append(pkt)
        self.qbytes[pkt.pcp] += pkt.length
        occ = self.qbytes[pkt.pcp]
        if occ > self.stats.max_occupancy_bytes.get(pkt.pcp, 0):
            self.stats.max_occupancy_bytes[pkt.pcp] = occ
        return True

    def queued(self) -> int:
        return sum(len(q) for q in self.queues.values())


class Simulator:
    """One run over one config; owns its RNG and event queue."""

    def __init__(self, config):
        violations = config.validate()
        if violations:
            raise ConfigInvalid(violations)
        self.cfg = config
        topo = config.topology
        self.link_ms_nw = topo.link(NodeId.MS, NodeId.NW)
        self.link_ds_sl = topo.link(NodeId.DS, NodeId.SL)
        self.proc = {n: topo.proc_delay(n) for n in NodeId}
        self.rng = np.random.default_rng(config.seed)
        self.heap: list = []
        self.ordinal = 0
        self.ms = _Port("MS", config.gcl_ms, self.link_ms_nw, config.queue_capacity_ms_bytes)
        self.sl = _Port("SL", config.gcl_sl, self.link_ds_sl, config.queue_capacity_sl_bytes)
        self.duration = config.duration_ns
        self.horizon = config.duration_ns + config.drain_ns
        self.last_exit: dict[int, int] = {}
        self.seq_by_stream: dict[int, int] = {}
        self.emitted: dict[int, int] = {}
        self.in_transit = 0
        self.probes: dict[tuple[str, int], dict[str, list[int]]] = {}
        self.delivered: dict[int, dict[str, list[int]]] = {}
        self.backlog_stream: dict[int, StreamSpec] = {
            s.pcp: s for s in config.streams if s.kind == StreamKind.DC and s.backlog
        }

    # -- event helpers -------------------------------------------------------

    def _push(self, t, kind, payload):
        heapq.heappush(self.heap, (t, self.ordinal, kind, payload))
        self.ordinal += 1

    def _probe(self, point, pkt, t):
        key = (point, pkt.pcp)
        rec = self.probes.get(key)
        if rec is None:
            rec = self.probes[key] = {"seq": [], "egress_ns": []}
        rec["seq"].append(pkt.seq)
        rec["egress_ns"].append(t)

    def _new_pkt(self, stream: StreamSpec, t: int) -> _Pkt:
        seq = self.seq_by_stream.get(stream.pcp, 0)
        self.seq_by_stream[stream.pcp] = seq + 1
        self.emitted[stream.pcp] = self.emitted.get(stream.pcp, 0) + 1
        return _Pkt(seq, stream.pcp, stream.packet_len_bytes, t)

    # -- run -----------------------------------------------------------------

    def run(self) -> RunResult:
        for i, stream in enumerate(self.cfg.streams):
            if stream.kind == StreamKind.DC and stream.backlog:
                self._refill_backlog(stream, 0)
            else:
                self._push(0, _EMIT, i)

        while self.heap:
            t = self.heap[0][0]
            if t > self.horizon:
                break
            t, _, kind, payload = heapq.heappop(self.heap)
            if kind == _EMIT:
                self._on_emit(t, payload)
            elif kind == _ENQ_MS:
                self._on_enqueue(t, self.ms, payload)
            elif kind == _ENQ_SL:
                self.in_transit -= 1
                payload.enq_sl = t
                self._on_enqueue(t, self.sl, payload)
            elif kind == _TRY:
                port = payload
                port.next_try = None
                self._attempt(port, t)
            else:  # _TXDONE
                port, pkt = payload
                if port is self.ms:
                    self._chain_to_sl(pkt)
                self._attempt(port, t)

        return self._result()

    # -- handlers ------------------------------------------------------------

    def _on_emit(self, t, stream_idx):
        stream = self.cfg.streams[stream_idx]
        count = stream.burst_size if stream.kind == StreamKind.DC else 1
        arrival = t + self.proc[NodeId.MS]
        for _ in range(count):
            self._push(arrival, _ENQ_MS, self._new_pkt(stream, t))
        nxt = t + stream.emit_interval_ns()
        if nxt < self.duration:
            self._push(nxt, _EMIT, stream_idx)

    def _refill_backlog(self, stream, t):
        # Backlogged source: keep the master queue topped up to capacity.
        port = self.ms
        while True:
            used = port.qbytes.get(stream.pcp, 0)
            if used + stream.packet_len_bytes > port.capacity:
                break
            port.enqueue(self._new_pkt(stream, t))
        self._try_schedule(port, t)

    def _on_enqueue(self, t, port, pkt):
        if port.enqueue(pkt):
            self._try_schedule(port, t)

    def _try_schedule(self, port, t):
        if t < port.busy_until:
            return  # the TXDONE at busy_until re-attempts
        s = self._best_start(port, t)
        if s is None:
            return
        if s == t:
            self._start_tx(port, t)
        elif s <= self.horizon and (port.next_try is None or s < port.next_try):
            port.next_try = s
            self._push(s, _TRY, port)

    def _attempt(self, port, t):
        # Start as many back-to-back frames as the schedule allows right now.
        while t >= port.busy_until:
            s = self._best_start(port, t)
            if s is None:
                return
            if s > t:
                if s <= self.horizon and (port.next_try is None or s < port.next_try):
                    port.next_try = s
                    self._push(s, _TRY, port)
                return
            self._start_tx(port, t)

    def _best_start(self, port, t):
        best = None
        best_pcp = None
        for pcp, q in port.queues.items():
            if not q:
                continue
            dur = tx_duration_ns(q[0].length, port.link.bandwidth_bps)
            if port.gcl is None:
                s = t
            else:
                s = gating.next_start(port.gcl, pcp, t, dur)
                if s is None:
                    continue  # head can never fit; stays queued (starvation)
            if best is None or s < best or (s == best and pcp < best_pcp):
                best, best_pcp = s, pcp
        if best is None:
            return None
        self._pending_pcp = best_pcp
        return best

    def _start_tx(self, port, t):
        pcp = self._pending_pcp
        q = port.queues[pcp]
        pkt = q.popleft()
        port.qbytes[pcp] -= pkt.length
        dur = tx_duration_ns(pkt.length, port.link.bandwidth_bps)
        port.busy_until = t + dur
        self._push(t + dur, _TXDONE, (port, pkt))
        if port is self.ms:
            pkt.probe_ms = t
            self._probe("MS", pkt, t)
            self.in_transit += 1
            stream = self.backlog_stream.get(pcp)
            if stream is not None and t < self.duration:
                self._refill_backlog(stream, t)
        else:
            pkt.probe_sl = t
            self._probe("SL", pkt, t)
            self._record_delivery(pkt)

    def _chain_to_sl(self, pkt):
        # The MS->NW wire, both translators and the bridge are not gated, so
        # the whole segment collapses into one deterministic arrival event.
        entry = pkt.probe_ms + sending_delay(pkt.length, self.link_ms_nw) + self.proc[NodeId.NW]
        exit_ns = entry + sample_delay(self.cfg.bridge, pkt.pcp, entry, self.rng)
        if self.cfg.bridge.in_order:
            prev = self.last_exit.get(pkt.pcp)
            if prev is not None and exit_ns < prev:
                exit_ns = prev
            self.last_exit[pkt.pcp] = exit_ns
        pkt.d5g = exit_ns - entry
        arrival = (
            exit_ns
            + self.proc[NodeId.DS]
            + sending_delay(pkt.length, self.link_ds_sl)
            + self.proc[NodeId.SL]
        )
        self._push(arrival, _ENQ_SL, pkt)

    def _record_delivery(self, pkt):
        cols = self.delivered.get(pkt.pcp)
        if cols is None:
            cols = self.delivered[pkt.pcp] = {
                "seq": [], "probe_ms": [], "probe_sl": [], "d_b5g": [], "sl_enqueue": [],
            }
        cols["seq"].append(pkt.seq)
        cols["probe_ms"].append(pkt.probe_ms)
        cols["probe_sl"].append(pkt.probe_sl)
        cols["d_b5g"].append(pkt.d5g)
        cols["sl_enqueue"].append(pkt.enq_sl)

    def _result(self) -> RunResult:
        k_by_pcp = {
            s.pcp: compute_K(self.cfg.topology, s.packet_len_bytes)
            for s in self.cfg.streams
        }
        gcl_sl = self.cfg.gcl_sl
        cycle = None
        if gcl_sl is not None:
            cycle = gcl_sl.cycle_ns
        elif self.cfg.gcl_ms is not None:
            cycle = self.cfg.gcl_ms.cycle_ns
        return RunResult(
            probes=self.probes,
            delivered=self.delivered,
            ms_stats=self.ms.stats,
            sl_stats=self.sl.stats,
            emitted=self.emitted,
            queued_at_end=self.ms.queued() + self.sl.queued(),
            in_transit_at_end=self.in_transit,
            k_by_pcp=k_by_pcp,
            seed=self.cfg.seed,
            cycle_ns=cycle,
            sl_base_offset_ns=gcl_sl.base_offset_ns if gcl_sl is not None else 0,
            duration_ns=self.duration,
        )


def simulate(config) -> RunResult:
    """Run one experiment to completion."""
    return Simulator(config).run()
