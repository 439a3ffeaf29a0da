"""Domain types shared by the trace reader, the policies and the engine."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional


class InvalidLease(ValueError):
    def __init__(self, field_name: str, reason: str):
        super().__init__(f"{field_name}: {reason}")
        self.field = field_name
        self.reason = reason


class LeaseKind(enum.Enum):
    BEST_EFFORT = "BE"
    ADVANCE_RESERVATION = "AR"


class LeaseState(enum.Enum):
    COMPLETED = "completed"
    REJECTED = "rejected"


@dataclass(frozen=True)
class NodeRequest:
    """Resources of one virtual machine (vnode) within a lease."""

    cpu_cores: int = 1
    memory_mb: int = 1024
    image_id: Optional[str] = None
    image_size_mb: Optional[int] = None

    def __post_init__(self):
        if self.cpu_cores < 1:
            raise InvalidLease("cpu_cores", "must be >= 1")
        if self.memory_mb < 1:
            raise InvalidLease("memory_mb", "must be >= 1")
        if self.image_size_mb is not None:
            if self.image_id is None:
                raise InvalidLease("image_size_mb", "given without image_id")
            if self.image_size_mb < 0:
                raise InvalidLease("image_size_mb", "must be >= 0")


@dataclass(frozen=True)
class Lease:
    id: int
    kind: LeaseKind
    arrival_time: int
    duration: int
    vnodes: tuple[NodeRequest, ...]
    requested_start: Optional[int] = None

    @classmethod
    def best_effort(cls, id, arrival, duration, count, cores=1, memory_mb=1024):
        return cls(id, LeaseKind.BEST_EFFORT, arrival, duration,
                   (NodeRequest(cores, memory_mb),) * count)

    @classmethod
    def reservation(cls, id, arrival, start, duration, count, cores=1, memory_mb=1024):
        return cls(id, LeaseKind.ADVANCE_RESERVATION, arrival, duration,
                   (NodeRequest(cores, memory_mb),) * count, requested_start=start)

    @property
    def is_ar(self) -> bool:
        return self.kind is LeaseKind.ADVANCE_RESERVATION

    @property
    def node(self) -> NodeRequest:
        return self.vnodes[0]

    @property
    def total_cores(self) -> int:
        return sum(v.cpu_cores for v in self.vnodes)


def validate_lease(lease: Lease) -> Lease:
    """Return ``lease`` unchanged, or raise :class:`InvalidLease` naming the broken field."""
    if lease.id < 0:
        raise InvalidLease("id", "must be non-negative")
    if lease.arrival_time < 0:
        raise InvalidLease("arrival_time", "must be non-negative")
    if lease.duration <= 0:
        raise InvalidLease("duration", "must be positive")
    if not lease.vnodes:
        raise InvalidLease("vnodes", "lease requests no nodes")
    if any(v != lease.vnodes[0] for v in lease.vnodes):
        raise InvalidLease("vnodes", "all vnodes of a lease must be identical")
    if lease.kind is LeaseKind.ADVANCE_RESERVATION:
        if lease.requested_start is None:
            raise InvalidLease("requested_start", "required for advance reservations")
        if lease.requested_start < lease.arrival_time:
            raise InvalidLease("requested_start", "earlier than arrival_time")
    elif lease.requested_start is not None:
        raise InvalidLease("requested_start", "only advance reservations carry a start")
    return lease


@dataclass(frozen=True)
class ClusterConfig:
    host_count: int = 1000
    cores_per_host: int = 8
    memory_per_host_mb: int = 10240

    def __post_init__(self):
        for name in ("host_count", "cores_per_host", "memory_per_host_mb"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")


@dataclass(frozen=True)
class Assignment:
    lease_id: int
    vnode_index: int
    cores: int
    memory_mb: int


@dataclass(frozen=True)
class Reservation:
    lease_id: int
    start: int
    end: int
    cores: int
    memory_mb: int


@dataclass
class Host:
    """A physical machine. Active iff it runs at least one vnode."""

    id: int
    total_cores: int
    total_memory_mb: int
    assignments: list[Assignment] = field(default_factory=list)
    reservations: list[Reservation] = field(default_factory=list)

    @property
    def active(self) -> bool:
        return bool(self.assignments)

    @property
    def busy_cores(self) -> int:
        return sum(a.cores for a in self.assignments)

    @property
    def busy_memory_mb(self) -> int:
        return sum(a.memory_mb for a in self.assignments)

    @property
    def lease_count(self) -> int:
        return len({a.lease_id for a in self.assignments})


@dataclass(frozen=True)
class PlacementEntry:
    vnode_index: int
    host_id: int
    cores: int
    memory_mb: int


@dataclass(frozen=True)
class Placement:
    """All-or-nothing mapping of a lease's vnodes onto hosts."""

    lease_id: int
    entries: tuple[PlacementEntry, ...]
    vnode_count: int

    def __post_init__(self):
        indices = sorted(e.vnode_index for e in self.entries)
        if indices != list(range(self.vnode_count)):
            raise ValueError(
                f"placement for lease {self.lease_id} must cover vnodes "
                f"0..{self.vnode_count - 1} exactly once, got {indices}")

    def per_host(self) -> dict[int, tuple[int, int]]:
        """Cores and memory the placement puts on each host, in first-use order."""
        out: dict[int, tuple[int, int]] = {}
        for e in self.entries:
            c, m = out.get(e.host_id, (0, 0))
            out[e.host_id] = (c + e.cores, m + e.memory_mb)
        return out


@dataclass
class LeaseOutcome:
    lease_id: int
    kind: LeaseKind
    arrival_time: int
    duration: int
    state: Optional[LeaseState] = None
    first_start: Optional[int] = None
    completion: Optional[int] = None
    preemption_count: int = 0
    # AR leases measure waiting from their requested start.
    ready_time: Optional[int] = None

    @property
    def waiting_time(self) -> Optional[int]:
        if self.first_start is None:
            return None
        ready = self.arrival_time if self.ready_time is None else self.ready_time
        return self.first_start - ready

    @property
    def slowdown(self) -> Optional[float]:
        if self.state is not LeaseState.COMPLETED:
            return None
        return (self.waiting_time + self.duration) / self.duration
