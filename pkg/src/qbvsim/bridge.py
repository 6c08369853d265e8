"""5G bridge delay models.

The bridge between the network-side and device-side translators is a
non-time-aware delay element: every packet picks up one sampled delay.
Variants cover a constant delay, replayed empirical samples, a shifted
lognormal, and a TDD-slot-aligned wrapper around any of those.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy import optimize
from scipy.special import ndtr, ndtri


class NoModelForPcp(Exception):
    pass


@dataclass(frozen=True)
class ConstantDelay:
    delay_ns: int

    def __post_init__(self):
        if self.delay_ns < 0:
            raise ValueError("delay must be non-negative")

    def sample(self, rng: np.random.Generator, entry_ns: int) -> int:
        return self.delay_ns

    def min_ns(self) -> int:
        return self.delay_ns

    def max_ns(self) -> int:
        return self.delay_ns


@dataclass(frozen=True)
class EmpiricalDelay:
    """Uniform draws from a sorted list of observed delays."""

    samples_ns: tuple[int, ...]

    def __post_init__(self):
        if not self.samples_ns:
            raise ValueError("empirical model needs at least one sample")
        if any(s < 0 for s in self.samples_ns):
            raise ValueError("delays must be non-negative")
        if list(self.samples_ns) != sorted(self.samples_ns):
            raise ValueError("samples must be sorted")

    @classmethod
    def from_csv(cls, path) -> "EmpiricalDelay":
        with open(path, newline="") as f:
            reader = csv.DictReader(f)
            if reader.fieldnames is None or "delay_ns" not in reader.fieldnames:
                raise ValueError(f"{path}: expected a 'delay_ns' column")
            samples = [int(row["delay_ns"]) for row in reader]
        return cls(tuple(sorted(samples)))

    def sample(self, rng: np.random.Generator, entry_ns: int) -> int:
        return self.samples_ns[int(rng.integers(0, len(self.samples_ns)))]

    def ecdf(self, x_ns: int) -> float:
        """Right-continuous empirical CDF: fraction of samples <= x."""
        import bisect

        return bisect.bisect_right(self.samples_ns, x_ns) / len(self.samples_ns)

    def min_ns(self) -> int:
        return self.samples_ns[0]

    def max_ns(self) -> int:
        return self.samples_ns[-1]


@dataclass(frozen=True)
class ShiftedLognormalDelay:
    """min_shift + lognormal(mu, sigma), optionally truncated at max_ns.

    Sampling is by inverse transform, so one uniform draw maps to one delay
    and reproducibility reduces to the generator's stream.
    """

    min_shift_ns: int
    mu: float
    sigma: float
    max_ns: Optional[int] = None

    def __post_init__(self):
        if self.min_shift_ns < 0:
            raise ValueError("min shift must be non-negative")
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if self.max_ns is not None and self.max_ns <= self.min_shift_ns:
            raise ValueError("truncation point must exceed the shift")

    def _trunc_mass(self) -> float:
        if self.max_ns is None:
            return 1.0
        z = (math.log(self.max_ns - self.min_shift_ns) - self.mu) / self.sigma
        return float(ndtr(z))

    def cdf(self, x_ns: float) -> float:
        if x_ns <= self.min_shift_ns:
            return 0.0
        if self.max_ns is not None and x_ns >= self.max_ns:
            return 1.0
        z = (math.log(x_ns - self.min_shift_ns) - self.mu) / self.sigma
        return float(ndtr(z)) / self._trunc_mass()

    def ppf(self, p: float) -> float:
        if not 0.0 < p <= 1.0:
            raise ValueError("p must be in (0, 1]")
        if p == 1.0 and self.max_ns is not None:
            return float(self.max_ns)
        z = ndtri(p * self._trunc_mass())
        return self.min_shift_ns + math.exp(self.mu + self.sigma * float(z))

    def mean_ns(self) -> float:
        c = self._trunc_mass()
        if self.max_ns is None:
            return self.min_shift_ns + math.exp(self.mu + self.sigma**2 / 2)
        zm = (math.log(self.max_ns - self.min_shift_ns) - self.mu) / self.sigma
        body = math.exp(self.mu + self.sigma**2 / 2) * float(ndtr(zm - self.sigma))
        return self.min_shift_ns + body / c

    def sample(self, rng: np.random.Generator, entry_ns: int) -> int:
        u = float(rng.random())
        if u <= 0.0:
            return self.min_shift_ns
        return int(round(self.ppf(u)))

    def min_ns(self) -> int:
        return self.min_shift_ns

    def max_ns_bound(self) -> Optional[int]:
        return self.max_ns


DL, UL, FLEX = "DL", "UL", "FLEX"


@dataclass(frozen=True)
class TddAlignedDelay:
    """Base delay plus the wait until the next downlink slot boundary.

    The pattern is cyclic; flexible slots do not count as downlink.
    """

    base: object
    slot_ns: int
    pattern: tuple[str, ...]

    def __post_init__(self):
        if self.slot_ns <= 0:
            raise ValueError("slot length must be positive")
        if not self.pattern:
            raise ValueError("pattern must be non-empty")
        if any(s not in (DL, UL, FLEX) for s in self.pattern):
            raise ValueError("pattern entries must be DL/UL/FLEX")
        if DL not in self.pattern:
            raise ValueError("pattern needs at least one DL slot")

    @property
    def period_ns(self) -> int:
        return self.slot_ns * len(self.pattern)

    def wait_to_next_dl(self, entry_ns: int) -> int:
        """Wait until the start of the next DL slot strictly after entry."""
        best = None
        phase = entry_ns % self.period_ns
        for i, kind in enumerate(self.pattern):
            if kind != DL:
                continue
            start = i * self.slot_ns
            wait = (start - phase) % self.period_ns
            if wait == 0:
                wait = self.period_ns
            if best is None or wait < best:
                best = wait
        return best

    def sample(self, rng: np.random.Generator, entry_ns: int) -> int:
        return self.wait_to_next_dl(entry_ns) + self.base.sample(rng, entry_ns)

    def min_ns(self) -> int:
        return self.base.min_ns()


def tdd_pattern_4d2f4u() -> tuple[str, ...]:
    """Four DL slots, two flexible, four UL — 5 ms period at 0.5 ms slots."""
    return (DL, DL, DL, DL, FLEX, FLEX, UL, UL, UL, UL)


@dataclass(frozen=True)
class BridgeDelayModel:
    """Per-pcp delay variants with an optional fallback."""

    per_pcp: tuple[tuple[int, object], ...]
    default: Optional[object] = None
    in_order: bool = True

    @classmethod
    def uniform(cls, variant, in_order: bool = True) -> "BridgeDelayModel":
        return cls(per_pcp=(), default=variant, in_order=in_order)

    @classmethod
    def for_pcps(cls, mapping: dict[int, object], default=None, in_order: bool = True) -> "BridgeDelayModel":
        return cls(per_pcp=tuple(sorted(mapping.items())), default=default, in_order=in_order)

    def variant_for(self, pcp: int):
        for p, v in self.per_pcp:
            if p == pcp:
                return v
        if self.default is not None:
            return self.default
        raise NoModelForPcp(f"no bridge delay model for pcp {pcp}")


def sample_delay(model: BridgeDelayModel, pcp: int, entry_ns: int, rng: np.random.Generator) -> int:
    """Draw one bridge traversal delay for a packet entering at entry_ns."""
    return model.variant_for(pcp).sample(rng, entry_ns)


def fit_shifted_lognormal(
    mean_ns: float,
    pctl: float,
    pctl_value_ns: float,
    min_shift_ns: int,
    max_ns: Optional[int] = None,
) -> ShiftedLognormalDelay:
    """Solve for (mu, sigma) matching a target mean and one target percentile."""

    def residual(params):
        mu, sigma = params
        if sigma <= 0:
            return [1e9, 1e9]
        m = ShiftedLognormalDelay(min_shift_ns, mu, abs(sigma), max_ns)
        return [m.mean_ns() - mean_ns, m.ppf(pctl) - pctl_value_ns]

    x0 = [math.log(max(mean_ns - min_shift_ns, 1.0)), 0.5]
    sol = optimize.fsolve(residual, x0, full_output=False, xtol=1e-12)
    mu, sigma = float(sol[0]), abs(float(sol[1]))
    model = ShiftedLognormalDelay(min_shift_ns, mu, sigma, max_ns)
    if abs(model.mean_ns() - mean_ns) > 1e-3 * mean_ns or abs(model.ppf(pctl) - pctl_value_ns) > 1e-3 * pctl_value_ns:
        raise RuntimeError("lognormal fit did not converge to its targets")
    return model


@lru_cache(maxsize=1)
def fitted_jitter_model() -> ShiftedLognormalDelay:
    """Synthetic bridge jitter: mean 6.8 ms, 99.9th percentile 15 ms,
    support [4 ms, 17 ms].  Chosen to mimic the reported testbed statistics;
    parameters are solved numerically, not measured."""
    return fit_shifted_lognormal(
        mean_ns=6_800_000.0,
        pctl=0.999,
        pctl_value_ns=15_000_000.0,
        min_shift_ns=4_000_000,
        max_ns=17_000_000,
    )
