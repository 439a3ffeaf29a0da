"""Experiment matrix runner and CSV reports."""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from leasesim.energy import PowerModel
from leasesim.engine import SimResult, run
from leasesim.model import ClusterConfig, Lease, LeaseKind, NodeRequest
from leasesim.policy import PolicyKind
from leasesim.traces import TraceWindow, load_trace

SUMMARY_HEADER = ["algorithm", "theta", "energy_kwh", "decrease_kwh", "decrease_pct",
                  "mean_wait_s", "mean_slowdown", "oversub_core_s", "rejected", "preemptions"]
ACTIVE_HEADER = ["t_s", "active_hosts"]
LEASES_HEADER = ["lease_id", "kind", "arrival_s", "start_s", "end_s", "wait_s", "slowdown",
                 "state", "preemptions"]
EVENTS_HEADER = ["t_s", "event", "lease_id", "vnode", "host_id", "cores"]


class ConfigError(ValueError):
    pass


class CellError(RuntimeError):
    def __init__(self, cell: "Cell", cause: BaseException):
        super().__init__(f"cell {cell.name} ({cell.policy.value}, theta={cell.theta:.4f}): {cause}")
        self.cell = cell
        self.cause = cause


@dataclass(frozen=True)
class Cell:
    name: str
    policy: PolicyKind
    theta: float = 1.0

    @property
    def is_baseline(self) -> bool:
        return self.policy is PolicyKind.GREEDY and self.theta == 1.0


MATRIX_CELLS = (
    Cell("OriginalGreedy", PolicyKind.GREEDY, 1.0),
    Cell("FF-MAP", PolicyKind.MAP, 1.0),
    Cell("FF-MAP-H2L", PolicyKind.MAP_H2L, 1.0),
    Cell("HalfPI-FF-MAP", PolicyKind.MAP, math.pi / 2),
    Cell("PI-FF-MAP", PolicyKind.MAP, math.pi),
)


def cell_for(policy: PolicyKind, theta: float) -> Cell:
    name = policy.value if theta == 1.0 else f"{policy.value}-theta{theta:.2f}"
    return Cell(name, policy, theta)


@dataclass
class ExperimentSpec:
    cells: Sequence[Cell] = MATRIX_CELLS
    cluster: ClusterConfig = ClusterConfig()
    power: PowerModel = PowerModel()
    trace_path: Optional[Path] = None
    trace_format: str = "swf"
    window: TraceWindow = TraceWindow()
    node_request: NodeRequest = NodeRequest()
    out_dir: Optional[Path] = None
    map_descending: bool = False
    jobs: int = 1
    leases: Optional[list[Lease]] = field(default=None, repr=False)

    def __post_init__(self):
        if not self.cells:
            raise ConfigError("experiment needs at least one cell")
        names = [c.name for c in self.cells]
        if len(set(names)) != len(names):
            raise ConfigError(f"duplicate cell names in {names}")

    def load(self) -> list[Lease]:
        if self.leases is None:
            if self.trace_path is None:
                raise ConfigError("no trace given")
            self.leases = load_trace(self.trace_path, self.trace_format, self.window,
                                     self.node_request)
        return self.leases


@dataclass
class SummaryRow:
    algorithm: str
    theta: float
    energy_mwh: int
    decrease_kwh: Optional[float]
    decrease_pct: Optional[float]
    mean_wait_s: float
    mean_slowdown: float
    oversub_core_s: int
    rejected: int
    preemptions: int

    @property
    def energy_kwh(self) -> float:
        return self.energy_mwh / 1_000_000

    def as_csv(self) -> list[str]:
        def opt(v):
            return "" if v is None else f"{v:.2f}"
        return [self.algorithm, f"{self.theta:.4f}", f"{self.energy_kwh:.2f}",
                opt(self.decrease_kwh), opt(self.decrease_pct), f"{self.mean_wait_s:.2f}",
                f"{self.mean_slowdown:.4f}", str(self.oversub_core_s), str(self.rejected),
                str(self.preemptions)]


def decrease(base_kwh: float, kwh: float) -> tuple[float, float]:
    """Saving against the baseline, in kWh and percent, rounded to 2 decimals.

    Both energies are first rounded to the 2 decimals they are reported with,
    so the percentage can be recomputed from the summary's energy column.
    """
    base_kwh, kwh = round(base_kwh, 2), round(kwh, 2)
    saved = base_kwh - kwh
    pct = saved / base_kwh * 100 if base_kwh else 0.0
    return round(saved, 2), round(pct, 2)


def summarize(cells: Sequence[Cell], results: Sequence[SimResult]) -> list[SummaryRow]:
    base = next((r for c, r in zip(cells, results) if c.is_baseline), None)
    rows = []
    for cell, res in zip(cells, results):
        if base is not None:
            d_kwh, d_pct = decrease(base.energy_kwh, res.energy_kwh)
        else:
            d_kwh = d_pct = None
        rows.append(SummaryRow(cell.name, cell.theta, res.energy_mwh, d_kwh, d_pct,
                               res.mean_wait, res.mean_slowdown,
                               res.oversubscribed_core_seconds, res.rejected, res.preemptions))
    return rows


def _run_cell(cell: Cell, cluster, power, leases, desc) -> SimResult:
    return run(cluster, power, cell.policy, cell.theta, leases, map_descending=desc)


def run_matrix(spec: ExperimentSpec) -> tuple[list[SummaryRow], list[SimResult]]:
    """Run every cell on the same trace; cells are independent and may run in
    separate processes, but results and reports always follow cell order."""
    leases = spec.load()
    args = (spec.cluster, spec.power, leases, spec.map_descending)
    results = []
    if spec.jobs > 1 and len(spec.cells) > 1:
        with ProcessPoolExecutor(max_workers=spec.jobs) as pool:
            futures = [pool.submit(_run_cell, cell, *args) for cell in spec.cells]
            for cell, fut in zip(spec.cells, futures):
                try:
                    results.append(fut.result())
                except Exception as exc:
                    raise CellError(cell, exc) from exc
    else:
        for cell in spec.cells:
            try:
                results.append(_run_cell(cell, *args))
            except Exception as exc:
                raise CellError(cell, exc) from exc
    rows = summarize(spec.cells, results)
    if spec.out_dir is not None:
        emit_reports(spec.cells, rows, results, spec.out_dir)
    return rows, results


def _write(path: Path, header: list[str], rows) -> Path:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    try:
        path.write_text(buf.getvalue(), encoding="ascii")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path


def _lease_rows(res: SimResult):
    for o in res.outcomes.values():
        slow = o.slowdown
        yield [o.lease_id, "AR" if o.kind is LeaseKind.ADVANCE_RESERVATION else "BE",
               o.arrival_time, "" if o.first_start is None else o.first_start,
               "" if o.completion is None else o.completion,
               "" if o.waiting_time is None else o.waiting_time,
               "" if slow is None else f"{slow:.6f}", o.state.value if o.state else "",
               o.preemption_count]


def emit_reports(cells: Sequence[Cell], rows: Sequence[SummaryRow],
                 results: Sequence[SimResult], out_dir) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = [_write(out / "summary.csv", SUMMARY_HEADER, (r.as_csv() for r in rows))]
    for cell, res in zip(cells, results):
        written.append(_write(out / f"active_hosts_{cell.name}.csv", ACTIVE_HEADER,
                              res.active_host_series))
        written.append(_write(out / f"leases_{cell.name}.csv", LEASES_HEADER, _lease_rows(res)))
        written.append(_write(out / f"events_{cell.name}.csv", EVENTS_HEADER, res.events))
    return written


def format_table(rows: Sequence[SummaryRow]) -> str:
    lines = [f"{'algorithm':<16}{'theta':>7}{'energy_kWh':>13}{'saved_kWh':>12}{'saved_%':>9}"
             f"{'wait_s':>10}{'slowdown':>10}{'rejected':>9}"]
    for r in rows:
        saved = "" if r.decrease_kwh is None else f"{r.decrease_kwh:.2f}"
        pct = "" if r.decrease_pct is None else f"{r.decrease_pct:.2f}"
        lines.append(f"{r.algorithm:<16}{r.theta:>7.2f}{r.energy_kwh:>13.2f}{saved:>12}{pct:>9}"
                     f"{r.mean_wait_s:>10.1f}{r.mean_slowdown:>10.3f}{r.rejected:>9}")
    return "\n".join(lines)
