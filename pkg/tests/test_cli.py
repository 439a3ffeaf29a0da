import subprocess
import sys

from leasesim.cli import EXIT_CELL_ERROR, main
from leasesim.traces import read_lease_trace

TRACE = """\
# id kind arrival start duration count cores mem
0 BE 0 -1 600 6 1 1024
1 BE 30 -1 300 4 1 1024
2 AR 40 200 100 8 1 1024
3 BE 90 -1 60 1 1 1024
"""


def write_trace(tmp_path):
    path = tmp_path / "small.txt"
    path.write_text(TRACE)
    return path


def test_single_run_writes_reports(tmp_path, capsys):
    out = tmp_path / "out"
    code = main(["--trace", str(write_trace(tmp_path)), "--hosts", "3", "--policy", "ff-map",
                 "--out", str(out)])
    assert code == 0
    assert sorted(p.name for p in out.iterdir()) == [
        "active_hosts_ff-map.csv", "events_ff-map.csv", "leases_ff-map.csv", "summary.csv"]
    assert "4 leases" in capsys.readouterr().out


def test_matrix_with_theta_and_descending_order(tmp_path):
    out = tmp_path / "out"
    code = main(["--trace", str(write_trace(tmp_path)), "--hosts", "3", "--matrix",
                 "--map-order", "desc", "--out", str(out)])
    assert code == 0
    lines = (out / "summary.csv").read_text().splitlines()
    assert [line.split(",")[0] for line in lines[1:]] == [
        "OriginalGreedy", "FF-MAP", "FF-MAP-H2L", "HalfPI-FF-MAP", "PI-FF-MAP"]


def test_theta_name_in_cell(tmp_path):
    out = tmp_path / "out"
    assert main(["--trace", str(write_trace(tmp_path)), "--hosts", "3", "--theta", "half-pi",
                 "--out", str(out)]) == 0
    assert (out / "leases_ff-map-theta1.57.csv").exists()


def test_convert_swf_to_lease_trace(tmp_path):
    swf = tmp_path / "log.swf"
    tail = " -1" * 13
    swf.write_text("; tiny log\n"
                   f"1 10 0 100 4{tail}\n"
                   f"2 20 0 -1 4{tail}\n"
                   f"3 86400 0 50 2{tail}\n")
    dest = tmp_path / "leases.txt"
    assert main(["--trace", str(swf), "--days", "1", "--convert-to", str(dest)]) == 0
    (lease,) = read_lease_trace(dest.read_text())
    assert (lease.arrival_time, lease.duration, len(lease.vnodes)) == (10, 100, 4)


def test_bad_trace_exits_with_error(tmp_path, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text("0 BE 0 -1 10\n")
    assert main(["--trace", str(bad)]) == EXIT_CELL_ERROR
    assert "line 1" in capsys.readouterr().err


def test_empty_lease_trace_exits_with_error(tmp_path):
    empty = tmp_path / "empty.txt"
    empty.write_text("# nothing here\n")
    assert main(["--trace", str(empty)]) == EXIT_CELL_ERROR


def test_bad_theta_exits_with_error(tmp_path):
    assert main(["--trace", str(write_trace(tmp_path)), "--theta", "0.5"]) == EXIT_CELL_ERROR


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "leasesim", "--trace", str(write_trace(tmp_path)),
                           "--hosts", "2", "--policy", "greedy"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert "greedy" in proc.stdout
