"""Standard Workload Format parsing, SWF -> lease conversion, and the plain
lease trace format.

Lease trace lines are ``id kind arrival start duration num_nodes cpu mem``
with ``kind`` in {BE, AR} and ``start`` = -1 for best-effort leases. Lines
starting with ``#`` are comments.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, Sequence, Union

from leasesim.model import InvalidLease, Lease, LeaseKind, NodeRequest, validate_lease

SECONDS_PER_DAY = 86400
SWF_FIELDS = 18

TextSource = Union[str, IO[str], Iterable[str]]


class TraceError(Exception):
    pass


class MalformedLine(TraceError):
    def __init__(self, line_number: int, reason: str = "expected 18 integer fields"):
        super().__init__(f"line {line_number}: {reason}")
        self.line_number = line_number


class MalformedTraceLine(TraceError):
    def __init__(self, line_number: int, reason: str):
        super().__init__(f"line {line_number}: {reason}")
        self.line_number = line_number
        self.reason = reason


class EmptyTrace(TraceError):
    pass


@dataclass(frozen=True)
class SwfJob:
    job_number: int
    submit_time: int
    wait_time: int
    run_time: int
    allocated_processors: int
    # fields 6..18 of the record, untouched
    rest: tuple[int, ...] = ()

    @property
    def usable(self) -> bool:
        return self.run_time > 0 and self.allocated_processors >= 1


@dataclass(frozen=True)
class TraceWindow:
    start_day: int = 0
    day_count: int = 10

    def __post_init__(self):
        if self.start_day < 0:
            raise ValueError("start_day must be >= 0")
        if self.day_count < 1:
            raise ValueError("day_count must be >= 1")

    @property
    def offset(self) -> int:
        return self.start_day * SECONDS_PER_DAY

    @property
    def end(self) -> int:
        return (self.start_day + self.day_count) * SECONDS_PER_DAY

    def __contains__(self, t: int) -> bool:
        return self.offset <= t < self.end


@dataclass
class ConversionStats:
    dropped: int = 0
    outside_window: int = 0
    emitted: int = 0


def _lines(source: TextSource) -> Iterable[str]:
    if isinstance(source, str):
        return io.StringIO(source)
    return source


def _number(tok: str) -> int:
    # Some archive logs write integral fields as "12.0".
    try:
        return int(tok)
    except ValueError:
        f = float(tok)
        if not f.is_integer():
            raise
        return int(f)


def parse_swf(source: TextSource) -> list[SwfJob]:
    jobs = []
    for lineno, line in enumerate(_lines(source), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith(";"):
            continue
        toks = stripped.split()
        if len(toks) < SWF_FIELDS:
            raise MalformedLine(lineno)
        try:
            nums = [_number(t) for t in toks]
        except ValueError:
            raise MalformedLine(lineno, "non-numeric field") from None
        jobs.append(SwfJob(nums[0], nums[1], nums[2], nums[3], nums[4], tuple(nums[5:])))
    return jobs


def read_swf(path: Union[str, Path]) -> list[SwfJob]:
    with open(path, encoding="ascii") as fh:
        return parse_swf(fh)


def convert_to_leases(jobs: Sequence[SwfJob], window: TraceWindow = TraceWindow(),
                      node_request: NodeRequest = NodeRequest(),
                      stats: ConversionStats | None = None) -> list[Lease]:
    """Turn every usable job submitted inside ``window`` into a best-effort lease
    with one ``node_request`` vnode per allocated processor.

    Arrival times are rebased to the window start; job order and run times are
    kept as they are. Lease ids are assigned 0, 1, ... in arrival order.
    """
    stats = stats if stats is not None else ConversionStats()
    ordered = sorted(jobs, key=lambda j: j.submit_time)  # stable: keeps file order on ties
    leases = []
    for job in ordered:
        if job.submit_time not in window:
            stats.outside_window += 1
            continue
        if not job.usable:
            stats.dropped += 1
            continue
        leases.append(Lease(len(leases), LeaseKind.BEST_EFFORT,
                            job.submit_time - window.offset, job.run_time,
                            (node_request,) * job.allocated_processors))
    stats.emitted = len(leases)
    if not leases:
        raise EmptyTrace(f"no usable jobs in days {window.start_day}.."
                         f"{window.start_day + window.day_count}")
    return leases


_KINDS = {"BE": LeaseKind.BEST_EFFORT, "AR": LeaseKind.ADVANCE_RESERVATION}


def parse_lease_line(line: str, lineno: int = 0) -> Lease:
    toks = line.split()
    if len(toks) != 8:
        raise MalformedTraceLine(lineno, f"expected 8 fields, got {len(toks)}")
    lid, kind, *rest = toks
    if kind not in _KINDS:
        raise MalformedTraceLine(lineno, f"unknown lease kind {kind!r}")
    try:
        lease_id = int(lid)
        arrival, start, duration, count, cores, mem = (int(t) for t in rest)
    except ValueError:
        raise MalformedTraceLine(lineno, "non-integer field") from None
    kind = _KINDS[kind]
    if kind is LeaseKind.BEST_EFFORT:
        if start != -1:
            raise MalformedTraceLine(lineno, "best-effort lease must have start -1")
        start = None
    if count < 1:
        raise MalformedTraceLine(lineno, "num_nodes must be >= 1")
    try:
        return validate_lease(Lease(lease_id, kind, arrival, duration,
                                    (NodeRequest(cores, mem),) * count, start))
    except InvalidLease as exc:
        raise MalformedTraceLine(lineno, str(exc)) from None


def read_lease_trace(source: TextSource) -> list[Lease]:
    leases = []
    seen = set()
    for lineno, line in enumerate(_lines(source), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        lease = parse_lease_line(stripped, lineno)
        if lease.id in seen:
            raise MalformedTraceLine(lineno, f"duplicate lease id {lease.id}")
        seen.add(lease.id)
        leases.append(lease)
    return leases


def format_lease(lease: Lease) -> str:
    node = lease.node
    kind = "AR" if lease.is_ar else "BE"
    start = lease.requested_start if lease.is_ar else -1
    return (f"{lease.id} {kind} {lease.arrival_time} {start} {lease.duration} "
            f"{len(lease.vnodes)} {node.cpu_cores} {node.memory_mb}")


def write_lease_trace(leases: Iterable[Lease], out: IO[str] | None = None) -> str:
    text = "".join(format_lease(lease) + "\n" for lease in leases)
    if out is not None:
        out.write(text)
    return text


def load_trace(path: Union[str, Path], fmt: str = "lease", window: TraceWindow = TraceWindow(),
               node_request: NodeRequest = NodeRequest(),
               stats: ConversionStats | None = None) -> list[Lease]:
    """Load a trace file as leases; ``fmt`` is ``swf`` or ``lease``."""
    try:
        if fmt == "swf":
            return convert_to_leases(read_swf(path), window, node_request, stats)
        if fmt == "lease":
            with open(path, encoding="ascii") as fh:
                return read_lease_trace(fh)
    except OSError as exc:
        raise TraceError(f"cannot read {path}: {exc}") from exc
    raise ValueError(f"unknown trace format {fmt!r}")
