"""Replicated simulation and timing runs behind the ``simulate`` and ``bench`` commands."""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .constants import DEFAULT_R_TCLUST
from .datagen import scenario
from .errors import InputError, TkMergeError
from .metrics import ari, percentage_gain, summarize
from .pipeline import fit_tk_merge
from .tclust import fit_tclust
from .trimmed_kmeans import fit_kmeans, fit_tkmeans

METHODS = ("tk-merge", "tk-means", "tclust", "kmeans")
DEFAULT_METHODS = ("tk-merge", "tk-means", "tclust")
REFERENCE = "tclust"


def replication_seed(seed: int, rep: int) -> int:
    """Independent 32-bit seed for replication ``rep`` of a run seeded by ``seed``."""
    return int(np.random.SeedSequence([seed % 2**64, rep]).generate_state(1)[0])


def inflated_k(scenario_id: str, K: int, n: int) -> int:
    """Number of first-step components used by tk-merge in the simulations.

    Gaussian scenarios use k = 2K; general shapes use k = round(2 K ln n).
    """
    if scenario_id in ("s1", "s2"):
        return 2 * K
    return max(K + 1, int(round(2 * K * math.log(n))))


def run_method(method: str, x: np.ndarray, K: int, alpha: float, seed: int, k: int | None = None,
               r: float = DEFAULT_R_TCLUST, n_starts: int = 20):
    """Fit one method and return (labels, seconds)."""
    t0 = time.perf_counter()
    if method == "tk-merge":
        labels = fit_tk_merge(x, K, k if k is not None else 2 * K, alpha, n_starts=n_starts,
                              seed=seed).final_partition.labels
    elif method == "tk-means":
        labels = fit_tkmeans(x, K, alpha, n_starts=n_starts, seed=seed).partition.labels
    elif method == "tclust":
        labels = fit_tclust(x, K, alpha, r, n_starts=n_starts, seed=seed).partition.labels
    elif method == "kmeans":
        labels = fit_kmeans(x, K, n_starts=n_starts, seed=seed).partition.labels
    else:
        raise InputError(f"unknown method {method!r}; choose from {METHODS}")
    return labels, time.perf_counter() - t0


def _one_replication(args):
    scenario_id, scale, level, n, rep, seed, methods, r, n_starts = args
    ds_seed = replication_seed(seed, rep)
    ds = scenario(scenario_id, scale, ds_seed, level, n)
    K, alpha = ds.params_echo["K"], ds.params_echo["alpha"]
    k = inflated_k(scenario_id, K, ds.n)
    rows = []
    for method in methods:
        row = {"scenario": scenario_id, "level": level, "n": ds.n, "rep": rep, "seed": ds_seed,
               "method": method, "ari": float("nan"), "seconds": float("nan"), "error": ""}
        try:
            labels, secs = run_method(method, ds.data.values, K, alpha, ds_seed, k, r, n_starts)
            row["ari"], row["seconds"] = ari(labels, ds.truth), secs
        except TkMergeError as exc:
            row["error"] = f"{type(exc).__name__}: {exc}"
        rows.append(row)
    return rows


def _map(fn, tasks, jobs):
    if jobs <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, tasks))


def simulate(scenario_id: str, reps: int, seed: int = 0, scale: float = 1.0, level: int = 0,
             n: int | None = None, methods=DEFAULT_METHODS, r: float = DEFAULT_R_TCLUST,
             n_starts: int = 20, jobs: int = 1):
    """Replicate one scenario cell and score every method against the truth.

    Returns ``(rows, summary)``: one row per (method, replication) and one
    summary entry per method with median and Sn of ARI and seconds plus the
    computing-time gain of the median time against TCLUST (when run).
    Failed fits are recorded in the row's ``error`` field and the run goes on.
    """
    if reps < 1:
        raise InputError("reps must be at least 1")
    tasks = [(scenario_id, scale, level, n, rep, seed, tuple(methods), r, n_starts) for rep in range(reps)]
    rows = [row for chunk in _map(_one_replication, tasks, jobs) for row in chunk]
    return rows, summarize_rows(rows, methods)


def summarize_rows(rows, methods):
    summary = []
    times = {}
    for method in methods:
        mine = [row for row in rows if row["method"] == method]
        a = summarize([row["ari"] for row in mine])
        t = summarize([row["seconds"] for row in mine])
        times[method] = t["median"]
        summary.append({"method": method, "reps": len(mine), "failures": sum(bool(row["error"]) for row in mine),
                        "ari_median": a["median"], "ari_sn": a["sn"],
                        "seconds_median": t["median"], "seconds_sn": t["sn"]})
    ref = times.get(REFERENCE)
    for entry in summary:
        ok = ref is not None and np.isfinite(ref) and ref > 0
        entry["gain_vs_tclust"] = percentage_gain(entry["seconds_median"], ref) if ok else float("nan")
    return summary


def bench(scenario_id: str, sizes, reps: int, seed: int = 0, methods=DEFAULT_METHODS,
          r: float = DEFAULT_R_TCLUST, n_starts: int = 20, jobs: int = 1):
    """Timing table: median wall time per method and size, with gain against TCLUST.

    Returns ``(rows, table)`` where ``table`` has one entry per (method, n).
    """
    sizes = [int(v) for v in sizes]
    if sizes != sorted(sizes):
        raise InputError("sizes must be ascending")
    if scenario_id not in ("s1", "s2"):
        raise InputError("bench varies the clean sample size and needs a Gaussian scenario (s1 or s2)")
    rows, table = [], []
    for size in sizes:
        cell_rows, cell = simulate(scenario_id, reps, seed, 1.0, 0, size, methods, r, n_starts, jobs)
        rows.extend(cell_rows)
        for entry in cell:
            table.append({"n": size, "method": entry["method"], "reps": entry["reps"],
                          "seconds_median": entry["seconds_median"], "seconds_sn": entry["seconds_sn"],
                          "gain_vs_tclust": entry["gain_vs_tclust"], "ari_median": entry["ari_median"]})
    return rows, table
