"""Event-driven lease scheduler.

Every instant with at least one event is processed in a fixed order:

1. lease ends (freeing capacity),
2. arrivals in trace order (best-effort leases join the queue, advance
   reservations are placed against other reservations only),
3. reservation starts, preempting best-effort leases that sit in the way,
4. one FIFO pass over the best-effort queue.

Host state is constant between instants, so energy is integrated once per
inter-event interval.
"""

from __future__ import annotations

import bisect
import heapq
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from leasesim.energy import EnergyLedger, PowerModel
from leasesim.mapper import HostSlot, MapFailure, effective_capacity, first_fit_map
from leasesim.model import (Assignment, ClusterConfig, Host, Lease, LeaseOutcome,
                            LeaseState, Placement, Reservation, validate_lease)
from leasesim.policy import PolicyKind, order_hosts, score_host

log = logging.getLogger(__name__)

_END, _ARRIVAL, _START = 0, 1, 2


class EventRecord(NamedTuple):
    t: int
    event: str
    lease_id: int
    vnode: int
    host_id: int
    cores: int


@dataclass
class SimResult:
    policy: PolicyKind
    theta: float
    config: ClusterConfig
    ledger: EnergyLedger
    outcomes: dict[int, LeaseOutcome]
    active_host_series: list[tuple[int, int]]
    oversubscribed_core_seconds: int
    events: list[EventRecord]
    map_descending: bool = False

    @property
    def energy_mwh(self) -> int:
        return self.ledger.total_mwh

    @property
    def energy_kwh(self) -> float:
        return self.ledger.total_kwh

    @property
    def preemptions(self) -> int:
        return sum(o.preemption_count for o in self.outcomes.values())

    @property
    def rejected(self) -> int:
        return sum(o.state is LeaseState.REJECTED for o in self.outcomes.values())

    def completed(self) -> list[LeaseOutcome]:
        return [o for o in self.outcomes.values() if o.state is LeaseState.COMPLETED]

    @property
    def mean_wait(self) -> float:
        done = self.completed()
        return sum(o.waiting_time for o in done) / len(done) if done else 0.0

    @property
    def mean_slowdown(self) -> float:
        done = self.completed()
        return sum(o.slowdown for o in done) / len(done) if done else 0.0


@dataclass
class _Run:
    lease: Lease
    placement: Placement
    start: int
    end: int
    token: int


class Simulator:
    def __init__(self, config: ClusterConfig, power: PowerModel = PowerModel(),
                 policy: PolicyKind = PolicyKind.MAP, theta: float = 1.0,
                 map_descending: bool = False, keep_records: bool = True):
        self.config = config
        self.policy = policy
        self.theta = theta
        self.map_descending = map_descending
        self.eff_cores = effective_capacity(config.cores_per_host, theta)
        self.eff_mem = effective_capacity(config.memory_per_host_mb, theta)
        n = config.host_count
        self.hosts = [Host(i, config.cores_per_host, config.memory_per_host_mb) for i in range(n)]
        self.busy_c = np.zeros(n, dtype=np.int64)
        self.busy_m = np.zeros(n, dtype=np.int64)
        self.host_leases: list[dict[int, int]] = [{} for _ in range(n)]
        self.total_busy_c = 0

        self.ledger = EnergyLedger(power, keep_records=keep_records)
        self.active_count = 0
        self.capped_busy = 0
        self.oversub = 0
        self.oversub_seconds = 0

        self.clock = 0
        self.heap: list[tuple] = []
        self.leases: dict[int, Lease] = {}
        self.fifo_key: dict[int, tuple[int, int]] = {}
        self.queue: list[tuple[tuple[int, int], int]] = []
        self.remaining: dict[int, int] = {}
        self.running: dict[int, _Run] = {}
        self.pending_ar: dict[int, Placement] = {}
        self.ar_hosts: set[int] = set()  # hosts holding a not-yet-started reservation
        self.tokens: dict[int, int] = {}
        self.outcomes: dict[int, LeaseOutcome] = {}
        self.series: list[tuple[int, int]] = []
        self.events: list[EventRecord] = []

    # -- bookkeeping -------------------------------------------------------

    def _host_contrib(self, h: int) -> tuple[int, int, int]:
        b = int(self.busy_c[h])
        cores = self.config.cores_per_host
        return (1 if b > 0 else 0), min(b, cores), max(0, b - cores)

    def _adjust(self, h: int, dc: int, dm: int):
        a0, c0, o0 = self._host_contrib(h)
        self.busy_c[h] += dc
        self.busy_m[h] += dm
        self.total_busy_c += dc
        a1, c1, o1 = self._host_contrib(h)
        self.active_count += a1 - a0
        self.capped_busy += c1 - c0
        self.oversub += o1 - o0

    def _push(self, t: int, kind: int, key, lease_id: int, token: int = 0):
        heapq.heappush(self.heap, (t, kind, key, lease_id, token))

    def _log(self, t, event, lease_id, vnode=-1, host_id=-1, cores=0):
        self.events.append(EventRecord(t, event, lease_id, vnode, host_id, cores))

    def _commit(self, lease: Lease, placement: Placement, t: int, duration: int):
        lid = lease.id
        for e in placement.entries:
            host = self.hosts[e.host_id]
            host.assignments.append(Assignment(lid, e.vnode_index, e.cores, e.memory_mb))
            counts = self.host_leases[e.host_id]
            counts[lid] = counts.get(lid, 0) + 1
            self._adjust(e.host_id, e.cores, e.memory_mb)
            self._log(t, "start", lid, e.vnode_index, e.host_id, e.cores)
        token = self.tokens.get(lid, 0) + 1
        self.tokens[lid] = token
        self.running[lid] = _Run(lease, placement, t, t + duration, token)
        self._push(t + duration, _END, lid, lid, token)
        out = self.outcomes[lid]
        if out.first_start is None:
            out.first_start = t

    def _release(self, run: _Run, t: int, event: str):
        lid = run.lease.id
        touched = set()
        for e in run.placement.entries:
            self._adjust(e.host_id, -e.cores, -e.memory_mb)
            self.host_leases[e.host_id].pop(lid, None)
            touched.add(e.host_id)
            self._log(t, event, lid, e.vnode_index, e.host_id, e.cores)
        for h in touched:
            host = self.hosts[h]
            host.assignments = [a for a in host.assignments if a.lease_id != lid]

    def _enqueue(self, lid: int):
        bisect.insort(self.queue, (self.fifo_key[lid], lid))

    # -- capacity views ----------------------------------------------------

    def _peak_use(self, h: int, t: int, end: int, ar_only: bool) -> tuple[int, int]:
        """Peak (cores, memory) committed on host ``h`` over ``[t, end)``.

        Running leases count until their scheduled end; reservations count
        over their whole interval. With ``ar_only`` only reservations count.
        """
        host = self.hosts[h]
        res = [r for r in host.reservations if r.start < end and r.end > t]
        if ar_only:
            items = [(r.start, r.end, r.cores, r.memory_mb) for r in res]
        else:
            res = [r for r in res if r.lease_id not in self.running]
            items = [(r.start, r.end, r.cores, r.memory_mb) for r in res]
            for lid, n in self.host_leases[h].items():
                run = self.running[lid]
                node = run.lease.node
                items.append((run.start, run.end, n * node.cpu_cores, n * node.memory_mb))
        points = {t} | {s for s, _, _, _ in items if t < s < end}
        peak_c = peak_m = 0
        for p in points:
            c = m = 0
            for s, e, ic, im in items:
                if s <= p < e:
                    c += ic
                    m += im
            peak_c = max(peak_c, c)
            peak_m = max(peak_m, m)
        return peak_c, peak_m

    def _be_use(self, t: int, end: int) -> tuple[np.ndarray, np.ndarray]:
        if not self.ar_hosts:
            return self.busy_c, self.busy_m
        used_c = self.busy_c.copy()
        used_m = self.busy_m.copy()
        for h in self.ar_hosts:
            used_c[h], used_m[h] = self._peak_use(h, t, end, ar_only=False)
        return used_c, used_m

    def _ordered_slots(self, order: Iterable[int], used_c, used_m) -> Iterable[HostSlot]:
        cfg = self.config
        for h in order:
            yield HostSlot(h, cfg.cores_per_host, cfg.memory_per_host_mb,
                           int(used_c[h]), int(used_m[h]))

    def _host_order(self) -> list[int]:
        scores = [score_host(self.policy, h, len(self.host_leases[h]), int(self.busy_c[h]))
                  for h in range(self.config.host_count)]
        return order_hosts(self.policy, scores, self.map_descending)

    # -- event handlers ----------------------------------------------------

    def handle_arrival(self, lease: Lease):
        if lease.is_ar:
            self.reserve_ar(lease)
        else:
            self._enqueue(lease.id)

    def reserve_ar(self, lease: Lease):
        t, lid = self.clock, lease.id
        start = lease.requested_start
        out = self.outcomes[lid]
        if start < t:
            self._reject(lid, t)
            return
        end = start + lease.duration
        n = self.config.host_count
        used = [self._peak_use(h, start, end, ar_only=True) if self.hosts[h].reservations
                else (0, 0) for h in range(n)]
        used_c = [u[0] for u in used]
        used_m = [u[1] for u in used]
        try:
            placement = first_fit_map(lease, list(self._ordered_slots(self._host_order(), used_c, used_m)),
                                      self.theta)
        except MapFailure:
            self._reject(lid, t)
            return
        for h, (c, m) in placement.per_host().items():
            self.hosts[h].reservations.append(Reservation(lid, start, end, c, m))
            self.ar_hosts.add(h)
        for e in placement.entries:
            self._log(t, "reserve", lid, e.vnode_index, e.host_id, e.cores)
        self.pending_ar[lid] = placement
        out.ready_time = start
        self._push(start, _START, lid, lid)

    def _reject(self, lid: int, t: int):
        self.outcomes[lid].state = LeaseState.REJECTED
        self._log(t, "reject", lid)

    def start_ar(self, lid: int):
        t = self.clock
        placement = self.pending_ar.pop(lid)
        lease = self.leases[lid]
        for h, (need_c, need_m) in placement.per_host().items():
            while (self.busy_c[h] + need_c > self.eff_cores
                   or self.busy_m[h] + need_m > self.eff_mem):
                victims = [v for v in self.host_leases[h] if not self.leases[v].is_ar]
                # reservations were admitted against other reservations only
                assert victims, f"no preemptible lease on host {h} for AR {lid}"
                self.preempt(max(victims))
        self._commit(lease, placement, t, lease.duration)
        self._refresh_ar_hosts(placement)

    def _refresh_ar_hosts(self, placement: Placement):
        for h in placement.per_host():
            if not any(r.lease_id in self.pending_ar for r in self.hosts[h].reservations):
                self.ar_hosts.discard(h)

    def preempt(self, lid: int):
        t = self.clock
        run = self.running.pop(lid)
        self._release(run, t, "preempt")
        self.remaining[lid] -= t - run.start
        self.outcomes[lid].preemption_count += 1
        self._enqueue(lid)
        log.debug("t=%d preempted lease %d, %d s left", t, lid, self.remaining[lid])

    def end_lease(self, lid: int):
        t = self.clock
        run = self.running.pop(lid)
        self._release(run, t, "end")
        self.remaining[lid] = 0
        if run.lease.is_ar:
            for h in run.placement.per_host():
                host = self.hosts[h]
                host.reservations = [r for r in host.reservations if r.lease_id != lid]
        out = self.outcomes[lid]
        out.state = LeaseState.COMPLETED
        out.completion = t

    def try_schedule_queue(self):
        t = self.clock
        cfg = self.config
        capacity = self.eff_cores * cfg.host_count
        still_waiting = []
        for key, lid in self.queue:
            lease = self.leases[lid]
            node = lease.node
            n = len(lease.vnodes)
            if capacity - self.total_busy_c < n * node.cpu_cores:
                still_waiting.append((key, lid))
                continue
            d = self.remaining[lid]
            used_c, used_m = self._be_use(t, t + d)
            fits = np.minimum((self.eff_cores - used_c) // node.cpu_cores,
                              (self.eff_mem - used_m) // node.memory_mb)
            if int(np.clip(fits, 0, None).sum()) < n:
                still_waiting.append((key, lid))
                continue
            placement = first_fit_map(lease, self._ordered_slots(self._host_order(), used_c, used_m),
                                      self.theta)
            self._commit(lease, placement, t, d)
        self.queue = still_waiting

    # -- main loop ---------------------------------------------------------

    def _sample_energy(self, t: int):
        self.ledger.add(self.clock, t, self.active_count,
                        Fraction(self.capped_busy, self.config.cores_per_host))
        self.oversub_seconds += self.oversub * (t - self.clock)

    def run(self, leases: Sequence[Lease]) -> SimResult:
        ordered = sorted(leases, key=lambda lease: lease.arrival_time)
        for pos, lease in enumerate(ordered):
            validate_lease(lease)
            if lease.id in self.leases:
                raise ValueError(f"duplicate lease id {lease.id}")
            self.leases[lease.id] = lease
            self.fifo_key[lease.id] = (lease.arrival_time, pos)
            self.remaining[lease.id] = lease.duration
            self.outcomes[lease.id] = LeaseOutcome(lease.id, lease.kind, lease.arrival_time,
                                                   lease.duration)
            self._push(lease.arrival_time, _ARRIVAL, pos, lease.id)
        if ordered:
            self.clock = ordered[0].arrival_time

        while self.heap:
            t = self.heap[0][0]
            self._sample_energy(t)
            self.clock = t
            while self.heap and self.heap[0][0] == t:
                _, kind, _, lid, token = heapq.heappop(self.heap)
                if kind == _END:
                    run = self.running.get(lid)
                    if run is not None and run.token == token:
                        self.end_lease(lid)
                elif kind == _ARRIVAL:
                    self.handle_arrival(self.leases[lid])
                else:
                    self.start_ar(lid)
            self.try_schedule_queue()
            self.series.append((t, self.active_count))

        for _, lid in self.queue:
            self._reject(lid, self.clock)
        self.queue = []
        return SimResult(self.policy, self.theta, self.config, self.ledger,
                         dict(sorted(self.outcomes.items())), self.series,
                         self.oversub_seconds, self.events, self.map_descending)


def run(config: ClusterConfig, power: PowerModel, policy: PolicyKind, theta: float,
        leases: Sequence[Lease], map_descending: bool = False,
        keep_records: bool = True) -> SimResult:
    """Simulate ``leases`` on a homogeneous cluster and return the result."""
    sim = Simulator(config, power, policy, theta, map_descending, keep_records)
    return sim.run(leases)
