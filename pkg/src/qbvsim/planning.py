"""Offline schedule planning: cycle, window sizes, percentile jitter bound,
slave-side offset, and inter-cycle-interference risk."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

from .model import Macrotick, Violation, ceil_div, tx_duration_ns

NS_PER_SEC = 10**9


class EmptyInput(Exception):
    pass


class BadPercentile(Exception):
    pass


class RateExceedsLink(Exception):
    pass


def network_cycle(app_cycles_ns: Sequence[int]) -> int:
    """Network cycle: greatest common divisor of the application cycles."""
    if not app_cycles_ns:
        raise EmptyInput("need at least one application cycle")
    if any(c <= 0 for c in app_cycles_ns):
        raise ValueError("application cycles must be positive")
    return math.gcd(*app_cycles_ns)


def window_for_rate(rate_bps: int, cycle_ns: int, bandwidth_bps: int,
                    macrotick: Optional[Macrotick] = None) -> int:
    """Window width carrying the given throughput over one cycle.

    Without a macrotick the result is the exact nanosecond ceiling; with one
    it is additionally rounded up to the schedule granularity.
    """
    if rate_bps < 0:
        raise ValueError("rate must be non-negative")
    if rate_bps > bandwidth_bps:
        raise RateExceedsLink(f"{rate_bps} bps exceeds link capacity {bandwidth_bps} bps")
    w = ceil_div(rate_bps * cycle_ns, bandwidth_bps)
    if macrotick is not None:
        w = macrotick.quantize_up(w)
    return w


def window_bounds(burst_size: int, packet_len_bytes: int, bandwidth_bps: int,
                  cycle_ns: int) -> tuple[int, int]:
    """(lower, upper) bound on the burst stream's window; upper is exclusive."""
    if burst_size <= 0 or packet_len_bytes <= 0 or bandwidth_bps <= 0 or cycle_ns <= 0:
        raise ValueError("all window-bound inputs must be positive")
    lower = ceil_div(8 * burst_size * packet_len_bytes * NS_PER_SEC, bandwidth_bps)
    return lower, cycle_ns


def percentile_bound(samples_ns: Sequence[int], p: float) -> int:
    """Distribution-free upper bound: the ceil(p*n)-th order statistic."""
    if not samples_ns:
        raise EmptyInput("need at least one sample")
    if not 0.0 < p <= 1.0:
        raise BadPercentile(f"p={p} outside (0, 1]")
    ordered = sorted(samples_ns)
    n = len(ordered)
    # Tolerate float representation of p: 0.999*1000 must land on 999.
    idx = math.ceil(p * n - 1e-9)
    idx = min(max(idx, 1), n)
    return ordered[idx - 1]


def compute_offset(k_ns: int, d_hat_ns: int, cycle_ns: int,
                   macrotick: Optional[Macrotick] = None) -> tuple[int, int]:
    """Slave cycle offset: delta = K + d_hat, reduced modulo the cycle.

    Quantization is opt-in so the planner's arithmetic stays exact; quantize
    when feeding the result into a real gate control list.
    """
    if k_ns < 0 or d_hat_ns < 0:
        raise ValueError("delay terms must be non-negative")
    if cycle_ns <= 0:
        raise ValueError("cycle must be positive")
    delta = k_ns + d_hat_ns
    if macrotick is not None:
        delta = macrotick.quantize_up(delta)
    return delta, delta % cycle_ns


class IciRisk(str, Enum):
    NONE = "None"
    POSSIBLE = "Possible"
    CERTAIN = "Certain"


def predict_ici(cycle_ns: int, uncertainty_width_ns: int) -> IciRisk:
    """Risk of packets straddling cycles given the bridge-delay spread."""
    if cycle_ns <= 0 or uncertainty_width_ns <= 0:
        raise ValueError("inputs must be positive")
    if uncertainty_width_ns > 2 * cycle_ns:
        return IciRisk.CERTAIN
    if cycle_ns > uncertainty_width_ns:
        return IciRisk.NONE
    return IciRisk.POSSIBLE


@dataclass(frozen=True)
class PlanInputs:
    app_cycles_ns: tuple[int, ...]
    dc_burst_size: int
    dc_packet_len_bytes: int
    dc_delay_budget_ns: Optional[int]
    be_rate_bps: int
    be_packet_len_bytes: int
    bottleneck_bps: int
    k_ns: int
    jitter_samples_ns: tuple[int, ...] = ()
    percentile: float = 0.999


@dataclass(frozen=True)
class SchedulePlan:
    cycle_ns: int
    w_dc_ns: int
    w_be_ns: int
    guard_band_ns: int
    delta_ns: int
    delta_prime_ns: int
    d_hat_ns: int
    ici_risk: IciRisk
    macrotick_ns: int = 16

    def to_dict(self) -> dict:
        return {
            "cycle_ns": self.cycle_ns,
            "w_dc_ns": self.w_dc_ns,
            "w_be_ns": self.w_be_ns,
            "guard_band_ns": self.guard_band_ns,
            "delta_ns": self.delta_ns,
            "delta_prime_ns": self.delta_prime_ns,
            "d_hat_ns": self.d_hat_ns,
            "ici_risk": self.ici_risk.value,
            "macrotick_ns": self.macrotick_ns,
        }


def make_plan(inputs: PlanInputs, guard_band_ns: int = 12000,
              sl_window_margin: float = 0.0,
              macrotick: Macrotick = Macrotick()) -> SchedulePlan:
    """Derive a full schedule from the stream demands and jitter samples."""
    t_c = network_cycle(list(inputs.app_cycles_ns))
    lower, _ = window_bounds(inputs.dc_burst_size, inputs.dc_packet_len_bytes,
                             inputs.bottleneck_bps, t_c)
    w_dc = macrotick.quantize_up(int(math.ceil(lower * (1.0 + sl_window_margin))))
    guard = macrotick.quantize_up(guard_band_ns)
    w_be = t_c - w_dc - guard
    d_hat = percentile_bound(list(inputs.jitter_samples_ns), inputs.percentile)
    delta, delta_prime = compute_offset(inputs.k_ns, d_hat, t_c, macrotick)
    width = d_hat - min(inputs.jitter_samples_ns)
    risk = predict_ici(t_c, width) if width > 0 else IciRisk.NONE
    return SchedulePlan(t_c, w_dc, w_be, guard, delta, delta_prime, d_hat, risk,
                        macrotick.ns)


def validate_plan(plan: SchedulePlan, inputs: PlanInputs) -> list[Violation]:
    """Check a plan against the burst-fit bounds, cycle composition,
    quantization and the stream's delay budget.  Violations are data."""
    out: list[Violation] = []
    m = Macrotick(plan.macrotick_ns)
    lower, upper = window_bounds(inputs.dc_burst_size, inputs.dc_packet_len_bytes,
                                 inputs.bottleneck_bps, plan.cycle_ns)
    if plan.w_dc_ns < lower:
        out.append(Violation("WindowBoundViolation",
                             f"w_dc {plan.w_dc_ns} below burst demand {lower}"))
    if plan.w_dc_ns >= upper:
        out.append(Violation("WindowBoundViolation",
                             f"w_dc {plan.w_dc_ns} not below cycle {upper}"))
    if plan.w_dc_ns + plan.w_be_ns + plan.guard_band_ns != plan.cycle_ns:
        out.append(Violation("CycleComposition",
                             "w_dc + w_be + guard does not equal the cycle"))
    for value, name in ((plan.w_dc_ns, "w_dc"), (plan.w_be_ns, "w_be"),
                        (plan.guard_band_ns, "guard"), (plan.cycle_ns, "cycle"),
                        (plan.delta_prime_ns, "delta_prime")):
        if not m.is_aligned(value):
            out.append(Violation("QuantizationError", f"{name} {value} not aligned to {m.ns} ns"))
    if plan.delta_prime_ns != plan.delta_ns % plan.cycle_ns:
        out.append(Violation("OffsetMismatch", "delta_prime is not delta mod cycle"))
    if inputs.dc_delay_budget_ns is not None:
        if plan.delta_ns + plan.w_dc_ns > inputs.dc_delay_budget_ns:
            out.append(Violation("BudgetExceeded",
                                 f"delta + w_dc = {plan.delta_ns + plan.w_dc_ns} exceeds "
                                 f"budget {inputs.dc_delay_budget_ns}"))
    return out
