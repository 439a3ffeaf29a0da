import io

import pytest
from hypothesis import given, strategies as st

from leasesim.model import Lease, NodeRequest
from leasesim.synthetic import bundled_swf_path, generate_swf
from leasesim.traces import (ConversionStats, EmptyTrace, MalformedLine, MalformedTraceLine,
                             SwfJob, TraceWindow, convert_to_leases, parse_swf,
                             read_lease_trace, write_lease_trace)

TAIL = " -1" * 13


def test_swf_data_line():
    (job,) = parse_swf("1 0 5 3600 8" + TAIL + "\n")
    assert (job.job_number, job.submit_time, job.wait_time, job.run_time,
            job.allocated_processors) == (1, 0, 5, 3600, 8)
    assert len(job.rest) == 13


def test_swf_comments_are_skipped():
    assert parse_swf("; Version: 2.2\n\n") == []


def test_swf_unknown_runtime_is_kept_by_parser():
    (job,) = parse_swf("7 12 -1 -1 -1" + TAIL)
    assert job.run_time == -1 and not job.usable


def test_swf_short_line():
    with pytest.raises(MalformedLine) as err:
        parse_swf("; header\n1 2 3\n")
    assert err.value.line_number == 2


def test_conversion_maps_fields():
    jobs = [SwfJob(1, 100, 0, 3600, 8)]
    (lease,) = convert_to_leases(jobs, TraceWindow(0, 10), NodeRequest(1, 1024))
    assert (lease.arrival_time, lease.duration, len(lease.vnodes)) == (100, 3600, 8)
    assert lease.node == NodeRequest(1, 1024)
    assert not lease.is_ar


def test_conversion_drops_unusable_and_counts_them():
    stats = ConversionStats()
    jobs = [SwfJob(1, 10, 0, -1, 8), SwfJob(2, 20, 0, 50, 0), SwfJob(3, 30, 0, 50, 2),
            SwfJob(4, 86400 * 3, 0, 50, 2)]
    leases = convert_to_leases(jobs, TraceWindow(0, 2), stats=stats)
    assert len(leases) == 1
    assert (stats.dropped, stats.outside_window, stats.emitted) == (2, 1, 1)


def test_conversion_rebases_to_window_start():
    jobs = [SwfJob(1, 86400 + 7, 0, 10, 1), SwfJob(2, 5, 0, 10, 1)]
    (lease,) = convert_to_leases(jobs, TraceWindow(1, 1))
    assert lease.arrival_time == 7


def test_empty_conversion():
    with pytest.raises(EmptyTrace):
        convert_to_leases([SwfJob(1, 0, 0, -1, 1)])


swf_jobs = st.lists(st.builds(SwfJob, st.integers(1, 10**6), st.integers(0, 5 * 86400),
                              st.just(0), st.integers(-1, 10**5), st.integers(-1, 64)),
                    min_size=1, max_size=60)


@given(swf_jobs)
def test_conversion_preserves_count_order_and_durations(jobs):
    window = TraceWindow(0, 3)
    usable = sorted((j for j in jobs if j.usable and j.submit_time in window),
                    key=lambda j: j.submit_time)
    try:
        leases = convert_to_leases(jobs, window)
    except EmptyTrace:
        assert not usable
        return
    assert len(leases) == len(usable)
    assert [lease.arrival_time for lease in leases] == [j.submit_time for j in usable]
    assert [lease.duration for lease in leases] == [j.run_time for j in usable]
    assert [len(lease.vnodes) for lease in leases] == [j.allocated_processors for j in usable]


def test_lease_trace_lines():
    be, ar = read_lease_trace("# comment\n42 BE 100 -1 3600 8 1 1024\n7 AR 0 500 60 2 2 2048\n")
    assert be == Lease.best_effort(42, 100, 3600, 8, 1, 1024)
    assert ar == Lease.reservation(7, 0, 500, 60, 2, 2, 2048)


@pytest.mark.parametrize("line, reason", [
    ("1 BE 0 -1 10 1 1", "expected 8 fields"),
    ("1 XX 0 -1 10 1 1 1", "unknown lease kind"),
    ("1 BE 0 5 10 1 1 1", "start -1"),
    ("1 AR 10 5 10 1 1 1", "requested_start"),
    ("1 BE 0 -1 0 1 1 1", "duration"),
    ("1 BE 0 -1 x 1 1 1", "non-integer"),
])
def test_malformed_lease_lines(line, reason):
    with pytest.raises(MalformedTraceLine) as err:
        read_lease_trace("# header\n" + line + "\n")
    assert err.value.line_number == 2
    assert reason in err.value.reason


def test_duplicate_ids_are_rejected():
    with pytest.raises(MalformedTraceLine):
        read_lease_trace("1 BE 0 -1 10 1 1 1\n1 BE 0 -1 10 1 1 1\n")


@st.composite
def leases(draw):
    out = []
    for i in range(draw(st.integers(0, 30))):
        arrival = draw(st.integers(0, 10**6))
        args = (draw(st.integers(1, 10**5)), draw(st.integers(1, 64)),
                draw(st.integers(1, 8)), draw(st.integers(1, 65536)))
        if draw(st.booleans()):
            out.append(Lease.reservation(i, arrival, arrival + draw(st.integers(0, 10**4)), *args))
        else:
            out.append(Lease.best_effort(i, arrival, *args))
    return out


@given(leases())
def test_lease_trace_round_trip(items):
    text = write_lease_trace(items)
    assert read_lease_trace(text) == items
    assert write_lease_trace(read_lease_trace(text)) == text


def test_write_to_stream():
    buf = io.StringIO()
    write_lease_trace([Lease.best_effort(1, 2, 3, 4)], buf)
    assert buf.getvalue() == "1 BE 2 -1 3 4 1 1024\n"


def test_bundled_trace_is_reproducible():
    assert bundled_swf_path().read_text() == generate_swf()


def test_bundled_trace_has_ten_days_of_1750_leases():
    stats = ConversionStats()
    leases_ = convert_to_leases(parse_swf(bundled_swf_path().read_text()), TraceWindow(0, 10),
                                stats=stats)
    assert len(leases_) == 1750
    assert stats.dropped > 0 and stats.outside_window > 0
    assert max(lease.arrival_time for lease in leases_) < 10 * 86400
