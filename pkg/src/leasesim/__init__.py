"""Power-aware lease scheduling simulator."""

from leasesim.energy import PowerModel
from leasesim.engine import SimResult, run
from leasesim.mapper import effective_capacity, first_fit_map
from leasesim.model import ClusterConfig, Lease, LeaseKind, NodeRequest
from leasesim.policy import PolicyKind, order_hosts, score_hosts

__all__ = ["ClusterConfig", "Lease", "LeaseKind", "NodeRequest", "PolicyKind", "PowerModel",
           "SimResult", "effective_capacity", "first_fit_map", "order_hosts", "run",
           "score_hosts"]
