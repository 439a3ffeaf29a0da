"""Deterministic generator for an Atlas-like SWF log.

The real LLNL Atlas log is not available offline, so the bundled trace is
produced by :func:`generate_swf` with the default arguments. Job widths follow
the Lublin-Feitelson batch model (a serial share, then a two-stage log-uniform
size with a preference for powers of two, capped at ``max_procs``); run times
are log-normal (median 15 min, clipped to 30 s .. 24 h); submissions follow a
day/night cycle.
"""

from __future__ import annotations

import io
from importlib import resources

import numpy as np

BUNDLED_SWF = "atlas-like-10d.swf"

SERIAL_PROB = 0.244
POW2_PROB = 0.576
U_LOW = 0.8
U_PROB = 0.86


def _submit_times(rng: np.random.Generator, count: int, days: int) -> np.ndarray:
    # thinning against a diurnal rate peaking mid-afternoon, 3:1 day/night
    out = []
    horizon = days * 86400
    while len(out) < count:
        t = rng.uniform(0, horizon, size=4 * count)
        hour = (t % 86400) / 3600
        rate = 0.5 + 0.5 * np.cos((hour - 15) / 24 * 2 * np.pi)
        keep = rng.uniform(size=t.size) < 0.25 + 0.75 * rate
        out.extend(t[keep].astype(np.int64).tolist())
    return np.sort(np.array(out[:count]))


def job_widths(rng: np.random.Generator, n: int, max_procs: int = 256) -> np.ndarray:
    u_hi = np.log2(max_procs)
    u_med = u_hi - 2.5
    lower = rng.uniform(size=n) < U_PROB
    u = np.where(lower, rng.uniform(U_LOW, u_med, size=n), rng.uniform(u_med, u_hi, size=n))
    width = np.where(rng.uniform(size=n) < POW2_PROB, 2.0 ** np.round(u), np.round(2.0 ** u))
    width = np.where(rng.uniform(size=n) < SERIAL_PROB, 1, width)
    return np.clip(width, 1, max_procs).astype(np.int64)


def generate_jobs(seed: int = 2011, usable: int = 1750, days: int = 10,
                  unusable: int = 40, spill_days: int = 1, max_procs: int = 256):
    """Rows of 18 SWF integers: ``usable`` runnable jobs submitted inside the
    first ``days`` days, ``unusable`` cancelled records (run time -1)
    scattered among them, and a sparse tail of jobs after the window."""
    rng = np.random.default_rng(seed)
    spill = usable * spill_days // (days * 4)
    submits = np.concatenate([
        _submit_times(rng, usable + unusable, days),
        days * 86400 + _submit_times(rng, spill, spill_days),
    ])
    n = submits.size
    procs = job_widths(rng, n, max_procs)
    runtime = np.clip(np.round(rng.lognormal(np.log(900), 1.6, size=n)), 30, 86400).astype(np.int64)
    wait = np.round(rng.exponential(300, size=n)).astype(np.int64)
    limit = np.minimum(86400, np.maximum(runtime, 3600 * np.ceil(runtime / 3600)))
    cancelled = np.zeros(n, dtype=bool)
    cancelled[rng.choice(usable + unusable, size=unusable, replace=False)] = True

    rows = []
    for i in range(n):
        run = -1 if cancelled[i] else int(runtime[i])
        status = 5 if cancelled[i] else 1
        user = int(rng.integers(1, 120))
        rows.append([i + 1, int(submits[i]), int(wait[i]), run, int(procs[i]), -1, -1,
                     int(procs[i]), int(limit[i]), -1, status, user, 1, -1, 1, 1, -1, -1])
    return rows


def generate_swf(seed: int = 2011, **kwargs) -> str:
    rows = generate_jobs(seed, **kwargs)
    buf = io.StringIO()
    buf.write("; Version: 2.2\n")
    buf.write("; Computer: synthetic Atlas-like cluster (1152 nodes x 8 cores)\n")
    buf.write(f"; Note: generated by leasesim.synthetic.generate_swf(seed={seed})\n")
    buf.write("; MaxJobs: %d\n; MaxNodes: 1152\n; MaxProcs: 9216\n" % len(rows))
    for row in rows:
        buf.write(" ".join(str(v) for v in row) + "\n")
    return buf.getvalue()


def bundled_swf_path():
    return resources.files("leasesim") / "data" / BUNDLED_SWF
