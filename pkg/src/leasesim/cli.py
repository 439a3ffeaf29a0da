"""Command-line front end.

    leasesim --matrix --out results/          # greedy baseline plus four consolidation runs
    leasesim --policy ff-map --theta pi       # one run
    leasesim --trace log.swf --days 10 --convert-to leases.txt
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from leasesim.energy import PowerModel
from leasesim.mapper import parse_theta
from leasesim.model import ClusterConfig, NodeRequest
from leasesim.policy import PolicyKind
from leasesim.report import (MATRIX_CELLS, CellError, ConfigError, ExperimentSpec, cell_for,
                             format_table, run_matrix)
from leasesim.synthetic import bundled_swf_path
from leasesim.traces import ConversionStats, TraceError, TraceWindow, load_trace, write_lease_trace

EXIT_CELL_ERROR = 2


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="leasesim", description=__doc__.splitlines()[0],
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--trace", type=Path,
                   help="workload file (default: the bundled Atlas-like SWF log)")
    p.add_argument("--format", dest="fmt", choices=["swf", "lease"], default=None,
                   help="trace format (default: swf for the bundled log, else by suffix)")
    p.add_argument("--days", type=int, default=10, help="SWF window length in days")
    p.add_argument("--start-day", type=int, default=0, help="SWF window start day")
    p.add_argument("--vm-cores", type=int, default=1, help="cores per converted VM")
    p.add_argument("--vm-mem-mb", type=int, default=1024, help="memory per converted VM")
    p.add_argument("--hosts", type=int, default=1000)
    p.add_argument("--cores", type=int, default=8, help="cores per host")
    p.add_argument("--mem-mb", type=int, default=10240, help="memory per host (MiB)")
    p.add_argument("--pmax", type=float, default=250.0, help="host power at full load (W)")
    p.add_argument("--k", type=float, default=0.7, help="idle/peak power ratio")
    p.add_argument("--policy", default="ff-map",
                   choices=[pk.value for pk in PolicyKind])
    p.add_argument("--theta", default="1", help="consolidation ratio: number, 'pi' or 'half-pi'")
    p.add_argument("--matrix", action="store_true", help="run the five-algorithm comparison")
    p.add_argument("--map-order", choices=["asc", "desc"], default="asc",
                   help="rank active hosts by ascending or descending lease count under ff-map")
    p.add_argument("--out", type=Path, help="directory for CSV reports")
    p.add_argument("--jobs", type=int, default=1, help="run matrix cells in parallel")
    p.add_argument("--convert-to", type=Path, metavar="PATH",
                   help="write the loaded trace in lease format and exit")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _guess_format(path: Path) -> str:
    return "swf" if path.suffix.lower() == ".swf" else "lease"


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")

    trace = args.trace if args.trace is not None else Path(str(bundled_swf_path()))
    fmt = args.fmt or _guess_format(trace)
    try:
        window = TraceWindow(args.start_day, args.days)
        node = NodeRequest(args.vm_cores, args.vm_mem_mb)
        cluster = ClusterConfig(args.hosts, args.cores, args.mem_mb)
        power = PowerModel(args.pmax, args.k)
        theta = parse_theta(args.theta)
    except ValueError as exc:
        print(f"leasesim: {exc}", file=sys.stderr)
        return EXIT_CELL_ERROR

    stats = ConversionStats()
    try:
        leases = load_trace(trace, fmt, window, node, stats)
    except (TraceError, ValueError) as exc:
        print(f"leasesim: {exc}", file=sys.stderr)
        return EXIT_CELL_ERROR
    if not leases:
        print(f"leasesim: {trace} contains no leases", file=sys.stderr)
        return EXIT_CELL_ERROR
    if fmt == "swf":
        print(f"trace: {trace.name}, days {window.start_day}..{window.start_day + window.day_count}: "
              f"{stats.emitted} leases ({stats.dropped} unusable jobs dropped, "
              f"{stats.outside_window} outside window)")
    else:
        print(f"trace: {trace.name}: {len(leases)} leases")

    if args.convert_to is not None:
        args.convert_to.write_text(write_lease_trace(leases), encoding="ascii")
        print(f"wrote {args.convert_to}")
        return 0

    cells = MATRIX_CELLS if args.matrix else (cell_for(PolicyKind.from_name(args.policy), theta),)
    try:
        spec = ExperimentSpec(cells=cells, cluster=cluster, power=power, out_dir=args.out,
                              map_descending=args.map_order == "desc", jobs=args.jobs,
                              leases=leases)
        rows, _ = run_matrix(spec)
    except (CellError, ConfigError, OSError) as exc:
        print(f"leasesim: {exc}", file=sys.stderr)
        return EXIT_CELL_ERROR
    print(format_table(rows))
    if args.out is not None:
        print(f"reports written to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
