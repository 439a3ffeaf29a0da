"""First-Fit mapping of a lease's vnodes onto an ordered host list."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from leasesim.model import Lease, Placement, PlacementEntry

HALF_PI = math.pi / 2


class MapFailure(Exception):
    def __init__(self, lease_id: int, placed_possible: int, needed: int):
        super().__init__(
            f"lease {lease_id}: only {placed_possible} of {needed} vnodes fit")
        self.lease_id = lease_id
        self.placed_possible = placed_possible
        self.needed = needed


def parse_theta(value) -> float:
    """Accept a number or one of the presets ``pi`` / ``half-pi``."""
    if isinstance(value, str):
        key = value.strip().lower().replace("_", "-")
        if key == "pi":
            return math.pi
        if key in ("half-pi", "halfpi", "pi/2"):
            return HALF_PI
        value = float(key)
    theta = float(value)
    if not theta >= 1.0:
        raise ValueError(f"consolidation ratio must be >= 1, got {theta}")
    return theta


def effective_capacity(total: int, theta: float) -> int:
    if total < 1:
        raise ValueError("capacity must be >= 1")
    if theta < 1.0:
        raise ValueError(f"consolidation ratio must be >= 1, got {theta}")
    return math.floor(theta * total)


@dataclass(frozen=True)
class HostSlot:
    """A host's physical size and its peak committed use over the window."""

    host_id: int
    total_cores: int
    total_memory_mb: int
    used_cores: int = 0
    used_memory_mb: int = 0

    def free(self, theta: float) -> tuple[int, int]:
        return (effective_capacity(self.total_cores, theta) - self.used_cores,
                effective_capacity(self.total_memory_mb, theta) - self.used_memory_mb)


def first_fit_map(lease: Lease, slots: Sequence[HostSlot], theta: float = 1.0) -> Placement:
    """Pack the lease's vnodes onto ``slots`` in order, filling each host as far
    as it goes before moving on. Raises :class:`MapFailure` unless every vnode
    is placed."""
    entries = []
    nxt = 0
    n = len(lease.vnodes)
    for slot in slots:
        if nxt == n:
            break
        free_c, free_m = slot.free(theta)
        while nxt < n:
            v = lease.vnodes[nxt]
            if v.cpu_cores > free_c or v.memory_mb > free_m:
                break
            entries.append(PlacementEntry(nxt, slot.host_id, v.cpu_cores, v.memory_mb))
            free_c -= v.cpu_cores
            free_m -= v.memory_mb
            nxt += 1
    if nxt < n:
        raise MapFailure(lease.id, nxt, n)
    return Placement(lease.id, tuple(entries), n)
