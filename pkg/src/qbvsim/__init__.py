"""Deterministic simulator and schedule planner for gated Ethernet networks
with a jittery wireless bridge in the path."""

from .bridge import (
    BridgeDelayModel,
    ConstantDelay,
    EmpiricalDelay,
    ShiftedLognormalDelay,
    TddAlignedDelay,
    fit_shifted_lognormal,
    fitted_jitter_model,
)
from .config import ExperimentConfig
from .engine import RunResult, compute_K, measure_departure_jitter, simulate
from .gating import GateControlList, GateWindow, build_gcl
from .model import (
    LinkSpec,
    Macrotick,
    NodeId,
    NodeSpec,
    StreamSpec,
    Topology,
    default_topology,
)
from .planning import (
    IciRisk,
    PlanInputs,
    SchedulePlan,
    compute_offset,
    make_plan,
    network_cycle,
    percentile_bound,
    predict_ici,
    validate_plan,
    window_for_rate,
)

__version__ = "0.1.0"

__all__ = [
    "BridgeDelayModel",
    "ConstantDelay",
    "EmpiricalDelay",
    "ExperimentConfig",
    "GateControlList",
    "GateWindow",
    "IciRisk",
    "LinkSpec",
    "Macrotick",
    "NodeId",
    "NodeSpec",
    "PlanInputs",
    "RunResult",
    "SchedulePlan",
    "ShiftedLognormalDelay",
    "StreamSpec",
    "TddAlignedDelay",
    "Topology",
    "build_gcl",
    "compute_K",
    "compute_offset",
    "default_topology",
    "fit_shifted_lognormal",
    "fitted_jitter_model",
    "make_plan",
    "measure_departure_jitter",
    "network_cycle",
    "percentile_bound",
    "predict_ici",
    "simulate",
    "validate_plan",
    "window_for_rate",
]
