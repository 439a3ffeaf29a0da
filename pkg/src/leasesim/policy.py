"""Host selection policies: the order in which the mapper tries hosts.

* ``greedy``: the lease manager's stock ordering. Hosts with the fewest
  running leases come first, so idle hosts are tried before busy ones.
* ``ff-map``: active hosts first (ascending lease count), idle hosts last.
* ``ff-map-h2l``: active hosts from most to fewest busy cores, idle hosts last.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Sequence

from leasesim.model import Host

PASSIVE_SCORE = -1


class PolicyKind(enum.Enum):
    GREEDY = "greedy"
    MAP = "ff-map"
    MAP_H2L = "ff-map-h2l"

    @classmethod
    def from_name(cls, name: str) -> "PolicyKind":
        try:
            return cls(name.lower())
        except ValueError:
            choices = ", ".join(p.value for p in cls)
            raise ValueError(f"unknown policy {name!r} (choose from {choices})") from None


@dataclass(frozen=True)
class HostScore:
    host_id: int
    lease_count: int
    busy_cores: int
    score: int

    @property
    def active(self) -> bool:
        return self.lease_count > 0


def score_host(policy: PolicyKind, host_id: int, lease_count: int, busy_cores: int) -> HostScore:
    if policy is PolicyKind.GREEDY or lease_count > 0:
        score = lease_count
    else:
        score = PASSIVE_SCORE
    return HostScore(host_id, lease_count, busy_cores, score)


def score_hosts(policy: PolicyKind, hosts: Iterable[Host], t: int | None = None) -> list[HostScore]:
    """Score every host from its current assignments (which must reflect time ``t``)."""
    return [score_host(policy, h.id, h.lease_count, h.busy_cores) for h in hosts]


def order_hosts(policy: PolicyKind, scores: Sequence[HostScore], descending: bool = False) -> list[int]:
    """Host ids in the order the mapper should scan them.

    ``descending`` flips MAP's ranking of active hosts (most leases first);
    idle hosts stay at the tail either way. It has no effect on the other
    policies.
    """
    if policy is PolicyKind.GREEDY:
        ranked = sorted(scores, key=lambda s: (s.score, s.host_id))
        return [s.host_id for s in ranked]

    active = [s for s in scores if s.active]
    passive = sorted(s.host_id for s in scores if not s.active)
    if policy is PolicyKind.MAP_H2L:
        active.sort(key=lambda s: (-s.busy_cores, s.host_id))
    elif descending:
        active.sort(key=lambda s: (-s.score, s.host_id))
    else:
        active.sort(key=lambda s: (s.score, s.host_id))
    return [s.host_id for s in active] + passive
