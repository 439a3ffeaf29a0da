import pytest
from hypothesis import given, strategies as st

from leasesim.model import Assignment, Host
from leasesim.policy import PolicyKind, order_hosts, score_host, score_hosts

G, MAP, H2L = PolicyKind.GREEDY, PolicyKind.MAP, PolicyKind.MAP_H2L


def scores_from_counts(policy, counts, busy=None):
    busy = busy or counts
    return [score_host(policy, h, c, b) for h, (c, b) in enumerate(zip(counts, busy))]


def test_map_scores_lease_count_and_negative_for_idle():
    hosts = [Host(0, 8, 1024), Host(1, 8, 1024)]
    hosts[0].assignments = [Assignment(1, 0, 1, 1), Assignment(2, 0, 1, 1)]
    assert [s.score for s in score_hosts(MAP, hosts, 0)] == [2, -1]


def test_greedy_idle_host_scores_zero():
    assert score_hosts(G, [Host(0, 8, 1024)], 0)[0].score == 0


def test_score_counts_leases_not_vnodes():
    host = Host(0, 8, 1024)
    host.assignments = [Assignment(7, i, 1, 1) for i in range(5)]
    s = score_hosts(MAP, [host], 0)[0]
    assert (s.score, s.busy_cores) == (1, 5)


def test_order_examples():
    assert order_hosts(MAP, scores_from_counts(MAP, [2, 0, 5])) == [0, 2, 1]
    assert order_hosts(H2L, scores_from_counts(H2L, [1, 0, 1], busy=[2, 0, 5])) == [2, 0, 1]
    assert order_hosts(G, scores_from_counts(G, [2, 0, 5])) == [1, 0, 2]


def test_map_descending_keeps_idle_hosts_last():
    assert order_hosts(MAP, scores_from_counts(MAP, [2, 0, 5]), descending=True) == [2, 0, 1]


def test_unknown_policy_name():
    assert PolicyKind.from_name("FF-MAP-H2L") is H2L
    with pytest.raises(ValueError):
        PolicyKind.from_name("best-fit")


host_states = st.lists(st.tuples(st.integers(0, 6), st.integers(0, 30)), min_size=1, max_size=40)


def build(policy, state):
    # busy cores only matter for active hosts, and an active host has at least one core busy
    return [score_host(policy, h, c, max(b, c) if c else 0) for h, (c, b) in enumerate(state)]


@given(st.sampled_from(list(PolicyKind)), host_states)
def test_order_is_a_permutation(policy, state):
    scores = build(policy, state)
    assert sorted(order_hosts(policy, scores)) == list(range(len(state)))


@given(st.sampled_from([MAP, H2L]), host_states, st.booleans())
def test_idle_hosts_form_the_tail(policy, state, desc):
    scores = build(policy, state)
    order = order_hosts(policy, scores, desc)
    active = [s.active for s in sorted(scores, key=lambda s: order.index(s.host_id))]
    assert active == sorted(active, reverse=True)
    assert all(s.score < 0 for s in scores if not s.active)


@given(st.sampled_from(list(PolicyKind)), host_states)
def test_order_is_deterministic(policy, state):
    scores = build(policy, state)
    assert order_hosts(policy, scores) == order_hosts(policy, list(reversed(scores)))


@given(host_states.filter(lambda s: any(c == 0 for c, _ in s) and any(c > 0 for c, _ in s)))
def test_greedy_and_map_disagree_on_idle_hosts(state):
    first_greedy = order_hosts(G, build(G, state))[0]
    map_order = order_hosts(MAP, build(MAP, state))
    idle = {h for h, (c, _) in enumerate(state) if c == 0}
    assert first_greedy in idle
    assert map_order[-1] in idle and map_order[0] not in idle
