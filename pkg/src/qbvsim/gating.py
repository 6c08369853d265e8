"""802.1Qbv egress gating: gate control lists and transmission-window arithmetic.

A window keeps its gate open over the half-open interval (open_ns, close_ns]
of every cycle occurrence; a transmission beginning at instant t occupies the
wire over (t, t + duration], so a frame may begin exactly at a window's open
boundary and must finish no later than its close boundary.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .model import Macrotick, Violation


class NoWindowForPcp(Exception):
    pass


class GclBuildError(ValueError):
    """Raised by build_gcl; carries the full violation list."""

    def __init__(self, violations: list[Violation]):
        super().__init__("; ".join(str(v) for v in violations))
        self.violations = violations

    def kinds(self) -> set[str]:
        return {v.kind for v in self.violations}


@dataclass(frozen=True)
class GateWindow:
    pcp: int
    open_ns: int
    close_ns: int

    @property
    def width_ns(self) -> int:
        return self.close_ns - self.open_ns


@dataclass(frozen=True)
class GateControlList:
    cycle_ns: int
    base_offset_ns: int
    windows: tuple[GateWindow, ...]
    guard_band_ns: int = 0

    def windows_for(self, pcp: int) -> tuple[GateWindow, ...]:
        return tuple(w for w in self.windows if w.pcp == pcp)

    def relative(self, t_ns: int) -> int:
        return (t_ns - self.base_offset_ns) % self.cycle_ns

    def pcps(self) -> tuple[int, ...]:
        return tuple(sorted({w.pcp for w in self.windows}))


def gate_state(gcl: GateControlList, pcp: int, t_ns: int) -> bool:
    """True iff the pcp's gate is open at instant t."""
    rel = gcl.relative(t_ns)
    return any(
        w.open_ns < rel <= w.close_ns
        # a window closing at the cycle end contains the wrap instant itself
        or (rel == 0 and w.close_ns == gcl.cycle_ns)
        for w in gcl.windows
        if w.pcp == pcp
    )


def next_open(gcl: GateControlList, pcp: int, t_ns: int, macrotick: Macrotick = Macrotick()) -> int:
    """Earliest t' >= t from which the gate stays open through the next macrotick."""
    windows = gcl.windows_for(pcp)
    if not windows:
        raise NoWindowForPcp(f"no window for pcp {pcp}")
    rel = gcl.relative(t_ns)
    best = None
    for w in windows:
        if w.width_ns < macrotick.ns:
            continue
        if w.open_ns <= rel <= w.close_ns - macrotick.ns:
            return t_ns
        # Start of the next occurrence of this window.
        cand = t_ns + (w.open_ns - rel) % gcl.cycle_ns
        if best is None or cand < best:
            best = cand
    if best is None:
        raise NoWindowForPcp(f"no window wide enough for pcp {pcp}")
    return best


def can_start_frame(gcl: GateControlList, pcp: int, t_ns: int, tx_duration_ns: int) -> bool:
    """True iff a frame beginning at t finishes inside the current window occurrence."""
    if tx_duration_ns <= 0:
        raise ValueError("tx_duration must be positive")
    rel = gcl.relative(t_ns)
    return any(
        w.open_ns <= rel and rel + tx_duration_ns <= w.close_ns
        for w in gcl.windows
        if w.pcp == pcp
    )


def next_start(gcl: GateControlList, pcp: int, t_ns: int, tx_duration_ns: int) -> Optional[int]:
    """Earliest t' >= t at which a frame of the given duration may begin.

    Returns None when no window of this pcp can ever fit the frame.
    """
    best = None
    rel = gcl.relative(t_ns)
    for w in gcl.windows:
        if w.pcp != pcp or w.width_ns < tx_duration_ns:
            continue
        if w.open_ns <= rel and rel + tx_duration_ns <= w.close_ns:
            return t_ns
        if rel < w.open_ns:
            cand = t_ns + (w.open_ns - rel)
        else:
            cand = t_ns + (gcl.cycle_ns - rel) + w.open_ns
        if best is None or cand < best:
            best = cand
    return best


def build_gcl(
    cycle_ns: int,
    base_offset_ns: int,
    windows: list[GateWindow] | tuple[GateWindow, ...],
    guard_band_ns: int = 0,
    macrotick: Macrotick = Macrotick(),
    dc_demand: Optional[tuple[int, int, int, int]] = None,
) -> GateControlList:
    """Validate and freeze a gate control list.

    dc_demand, when given, is (pcp, burst_size, packet_len_bytes, bandwidth_bps)
    and enables the burst-fit bound on that pcp's window: the window must hold
    the whole burst and stay strictly shorter than the cycle.
    """
    from .model import tx_duration_ns as _tx

    v: list[Violation] = []
    if cycle_ns <= 0:
        v.append(Violation("BadCycle", f"cycle {cycle_ns} not positive"))
        raise GclBuildError(v)
    if guard_band_ns < 0:
        v.append(Violation("BadGuard", "guard band negative"))
    for t, name in ((cycle_ns, "cycle"), (base_offset_ns, "base_offset"), (guard_band_ns, "guard_band")):
        if not macrotick.is_aligned(t):
            v.append(Violation("QuantizationError", f"{name} {t} not a multiple of {macrotick.ns} ns"))
    for w in windows:
        for t, name in ((w.open_ns, "open"), (w.close_ns, "close")):
            if not macrotick.is_aligned(t):
                v.append(Violation("QuantizationError", f"pcp {w.pcp} window {name} {t} not a multiple of {macrotick.ns} ns"))
        if not (0 <= w.open_ns < w.close_ns <= cycle_ns):
            v.append(Violation("BadWindow", f"pcp {w.pcp} window [{w.open_ns}, {w.close_ns}] outside 0..{cycle_ns}"))

    ordered = sorted(windows, key=lambda w: (w.open_ns, w.close_ns))
    for a, b in zip(ordered, ordered[1:]):
        if b.open_ns < a.close_ns:
            v.append(Violation("OverlapError", f"pcp {a.pcp} window overlaps pcp {b.pcp} window"))
    total = sum(w.width_ns for w in windows) + guard_band_ns
    if total > cycle_ns:
        v.append(Violation("CycleOverflow", f"window widths + guard = {total} exceed cycle {cycle_ns}"))
    if guard_band_ns > 0:
        # The guard band is a dead interval at the cycle end.
        for w in windows:
            if w.close_ns > cycle_ns - guard_band_ns:
                v.append(Violation("OverlapError", f"pcp {w.pcp} window runs into the guard band"))

    if dc_demand is not None:
        pcp, burst, length, bw = dc_demand
        need = burst * _tx(length, bw)
        got = sum(w.width_ns for w in windows if w.pcp == pcp)
        if got < need:
            v.append(Violation("WindowBoundViolation", f"pcp {pcp} window {got} ns below burst demand {need} ns"))
        if got >= cycle_ns:
            v.append(Violation("WindowBoundViolation", f"pcp {pcp} window {got} ns not below cycle {cycle_ns} ns"))

    if v:
        raise GclBuildError(v)
    return GateControlList(cycle_ns, base_offset_ns, tuple(ordered), guard_band_ns)
