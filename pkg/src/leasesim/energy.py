"""Linear host power model and energy integration between scheduler events.

A host draws ``p_idle + (p_max - p_idle) * u`` watts while active, where
``p_idle = k * p_max`` and ``u`` is the fraction of its physical cores that
are busy. Passive hosts are switched off and draw nothing.

Energy is accumulated from integer counters (active host-seconds and
utilization-seconds as an exact fraction), so splitting an interval never
changes the total and two runs agree to the milliwatt-hour.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from leasesim.model import Host


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class PowerModel:
    p_max: float = 250.0
    k: float = 0.7

    def __post_init__(self):
        if not self.p_max > 0:
            raise ValueError("p_max must be positive")
        if not 0.0 <= self.k <= 1.0:
            raise ValueError("k must lie in [0, 1]")

    @property
    def p_idle(self) -> float:
        return self.k * self.p_max

    def power(self, u: float) -> float:
        return power(self, u)


def power(model: PowerModel, u: float) -> float:
    """Watts drawn by an active host at CPU utilization ``u``."""
    if not 0.0 <= u <= 1.0:
        raise DomainError(f"utilization {u} outside [0, 1]")
    p_idle = model.p_idle
    return p_idle + (model.p_max - p_idle) * u


def utilization(host: Host) -> float:
    """Busy fraction of physical cores; oversubscribed hosts saturate at 1."""
    return min(1.0, host.busy_cores / host.total_cores)


@dataclass
class IntervalRecord:
    t_start: int
    t_end: int
    active_hosts: int
    power_w: float


@dataclass
class EnergyLedger:
    model: PowerModel
    active_host_seconds: int = 0
    utilization_seconds: Fraction = Fraction(0)
    records: list[IntervalRecord] = field(default_factory=list)
    keep_records: bool = True

    def add(self, t1: int, t2: int, active_hosts: int, busy_fraction: Fraction):
        """Add ``[t1, t2)`` during which ``active_hosts`` hosts were on with
        summed (capped) utilization ``busy_fraction``."""
        if t2 < t1:
            raise ValueError(f"interval end {t2} before start {t1}")
        dt = t2 - t1
        if dt == 0:
            return
        self.active_host_seconds += active_hosts * dt
        self.utilization_seconds += busy_fraction * dt
        if self.keep_records:
            p = self.model.p_idle * active_hosts + (
                self.model.p_max - self.model.p_idle) * float(busy_fraction)
            self.records.append(IntervalRecord(t1, t2, active_hosts, p))

    def accumulate(self, hosts: Iterable[Host], t1: int, t2: int) -> "EnergyLedger":
        active = 0
        busy = Fraction(0)
        for h in hosts:
            if not h.active:
                continue
            active += 1
            busy += Fraction(min(h.busy_cores, h.total_cores), h.total_cores)
        self.add(t1, t2, active, busy)
        return self

    @property
    def total_wh_exact(self) -> Fraction:
        p_max = Fraction(self.model.p_max)
        p_idle = Fraction(self.model.k) * p_max
        joules = p_idle * self.active_host_seconds + (p_max - p_idle) * self.utilization_seconds
        return joules / 3600

    @property
    def total_mwh(self) -> int:
        return round(self.total_wh_exact * 1000)

    @property
    def total_wh(self) -> float:
        return self.total_mwh / 1000

    @property
    def total_kwh(self) -> float:
        return self.total_mwh / 1_000_000
