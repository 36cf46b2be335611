"""k-means and trimmed k-means fitted by concentration steps.

One concentration step, given centroids:

1. distance of every point to its nearest centroid (ties -> lowest index),
2. keep the floor(n(1-alpha)) points with the smallest distance,
3. assign kept points to their nearest centroid,
4. move every centroid to the mean of its kept points.

The trimmed within-cluster sum of squares never increases from one step to the
next.  Each restart is seeded with distance-weighted (k-means++) sampling over
the full data, ignoring at each draw the points that the trimming level would
discard anyway.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import checks
from .constants import DEFAULT_MAX_ITER, DEFAULT_N_STARTS, DEFAULT_TOL
from .errors import DegenerateCluster, InputError, KTooLarge
from .model import ClusterModel, DataMatrix, Partition, as_data, retained_count, seed_sequence


@dataclass(frozen=True)
class TkmFit:
    """Result of :func:`fit_tkmeans` / :func:`fit_kmeans`.

    ``model.covariances`` holds the isotropic covariances
    SSE_j / (p * size_j) * I; ``empirical_covariances`` holds the plain
    within-cluster covariance of the kept points (divisor size_j).
    """

    model: ClusterModel
    partition: Partition
    objective: float
    iterations: int
    converged: bool
    empirical_covariances: np.ndarray
    history: tuple[float, ...] = ()
    restart: int = 0
    failed_restarts: int = 0
    alpha: float = 0.0

    @property
    def components(self) -> np.ndarray:
        """0-based component index per observation, -1 for trimmed points."""
        return self.partition.labels - 1


def sq_distances(x: np.ndarray, centers: np.ndarray) -> np.ndarray:
    """n x k matrix of squared Euclidean distances."""
    out = np.zeros((x.shape[0], centers.shape[0]))
    for j in range(x.shape[1]):
        diff = x[:, j, None] - centers[None, :, j]
        out += diff * diff
    return out


def smallest_mask(values: np.ndarray, h: int) -> np.ndarray:
    """Boolean mask of the ``h`` smallest values, ties broken by lower index.

    Same selection as the first ``h`` entries of a stable argsort, in linear
    time.
    """
    n = values.shape[0]
    if h >= n:
        return np.ones(n, dtype=bool)
    if h <= 0:
        return np.zeros(n, dtype=bool)
    thr = np.partition(values, h - 1)[h - 1]
    mask = values < thr
    ties = np.flatnonzero(values == thr)[: h - int(mask.sum())]
    mask[ties] = True
    return mask


def argmin_rows(s: np.ndarray):
    """Column-wise (argmin, min) of a short, wide k x n matrix; ties go to the lowest row.

    Same result as ``s.argmin(axis=0)``, but a loop over the few rows is
    several times faster than numpy's strided reduction for small k.
    """
    best = s[0].copy()
    idx = np.zeros(s.shape[1])
    for j in range(1, s.shape[0]):
        better = s[j] < best
        idx += better * (j - idx)
        np.minimum(best, s[j], out=best)
    return idx.astype(np.intp), best


def kmeanspp_seeds(x: np.ndarray, k: int, rng: np.random.Generator, h: int | None = None) -> np.ndarray:
    """Distance-weighted (k-means++) seeding over the full data.

    With ``h < n`` the n - h points currently farthest from the chosen seeds
    get zero weight at every draw, so a gross outlier is not picked just
    because it is far away.  ``h = n`` is plain k-means++.  Falls back to a
    uniform draw once all weights vanish.
    """
    n = x.shape[0]
    h = n if h is None else h
    idx = np.empty(k, dtype=np.int64)
    idx[0] = rng.integers(n)
    d2 = ((x - x[idx[0]]) ** 2).sum(axis=1)
    for j in range(1, k):
        w = d2
        if h < n:
            w = np.where(smallest_mask(d2, h), d2, 0.0)
        total = w.sum()
        u = rng.random()
        if total > 0:
            idx[j] = min(int(np.searchsorted(np.cumsum(w), u * total, side="right")), n - 1)
        else:
            idx[j] = int(u * n)
        d2 = np.minimum(d2, ((x - x[idx[j]]) ** 2).sum(axis=1))
    return x[idx].copy()


def concentrate(x: np.ndarray, centers: np.ndarray, h: int):
    """Assign to nearest centre and keep the ``h`` closest points.

    Returns (labels, dmin, keep_mask, objective) with 1-based labels and 0 for
    trimmed points.  Trimming ties are broken by observation index.
    """
    # ranking by |c|^2 - 2<x, c> is cheaper than full distances; the kept
    # distance is then recomputed exactly for the chosen centre
    score = centers @ x.T
    score *= -2.0
    score += (centers * centers).sum(axis=1)[:, None]
    nearest, _ = argmin_rows(score)
    diff = x - np.take(centers, nearest, axis=0)
    dmin = np.einsum("ij,ij->i", diff, diff)
    keep = smallest_mask(dmin, h)
    labels = np.where(keep, nearest + 1, 0)
    return labels, dmin, keep, float(dmin[keep].sum())


def cluster_means(x: np.ndarray, labels: np.ndarray, k: int):
    # trimmed points go to an extra bin k that is dropped
    idx = np.where(labels > 0, labels - 1, k)
    counts = np.bincount(idx, minlength=k + 1)[:k]
    sums = np.stack([np.bincount(idx, weights=x[:, j], minlength=k + 1)[:k] for j in range(x.shape[1])], axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        means = sums / counts[:, None]
    return means, counts


def _one_restart(x, K, h, max_iter, tol, rng):
    centers = kmeanspp_seeds(x, K, rng, h)
    prev_obj = np.inf
    prev_labels = None
    reseeded: set[int] = set()
    history = []
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        labels, dmin, keep, obj = concentrate(x, centers, h)
        counts = np.bincount(labels[keep] - 1, minlength=K)
        empty = set(np.flatnonzero(counts == 0).tolist())
        if empty & reseeded:
            raise DegenerateCluster(f"cluster(s) {sorted(empty & reseeded)} stay empty after re-seeding")
        if history:
            checks.non_increasing(history[-1], obj, "trimmed SSE")
        history.append(obj)
        if prev_labels is not None and np.array_equal(labels, prev_labels):
            converged = True
            break
        if not empty and np.isfinite(prev_obj) and prev_obj - obj <= tol * abs(prev_obj):
            converged = True
            break
        prev_obj, prev_labels = obj, labels
        means, _ = cluster_means(x, labels, K)
        reseeded = set()
        if empty:
            # re-seed empty clusters at the kept points farthest from their centroid
            candidates = np.flatnonzero(keep)
            candidates = candidates[np.argsort(-dmin[candidates], kind="stable")]
            for slot, j in enumerate(sorted(empty)):
                if slot >= candidates.size:
                    raise DegenerateCluster("not enough kept points to re-seed empty clusters")
                means[j] = x[candidates[slot]]
                reseeded.add(j)
        centers = means
    if empty:
        raise DegenerateCluster(f"cluster(s) {sorted(empty)} empty after {max_iter} iterations")
    return centers, labels, obj, it, converged, history


def _check_args(dm: DataMatrix, K: int, alpha: float, n_starts: int, max_iter: int) -> int:
    h = retained_count(dm.n, alpha)
    if K < 1:
        raise InputError("K must be positive")
    if K > dm.n:
        raise KTooLarge(f"K={K} exceeds the number of observations n={dm.n}")
    if K > h:
        raise KTooLarge(f"K={K} exceeds the retained count floor(n(1-alpha))={h}")
    if n_starts < 1 or max_iter < 1:
        raise InputError("n_starts and max_iter must be positive")
    return h


def fit_tkmeans(
    data,
    K: int,
    alpha: float = 0.0,
    n_starts: int = DEFAULT_N_STARTS,
    max_iter: int = DEFAULT_MAX_ITER,
    tol: float = DEFAULT_TOL,
    seed: int = 0,
) -> TkmFit:
    """Trimmed k-means with multiple k-means++ restarts.

    Parameters
    ----------
    data : array-like or DataMatrix, shape (n, p)
    K : int
        Number of clusters.
    alpha : float
        Trimming proportion in [0, 0.5]; exactly n - floor(n(1-alpha))
        observations receive label 0.
    n_starts, max_iter, tol : int, int, float
        Restarts, iteration cap per restart, and relative objective improvement
        below which a restart stops.
    seed : int
        Restart ``i`` draws from ``SeedSequence([seed, i])``.

    Returns
    -------
    TkmFit
        The restart with the smallest trimmed SSE (ties -> lowest restart index).

    Raises
    ------
    AlphaOutOfRange, KTooLarge
        Invalid arguments.
    DegenerateCluster
        If every restart ended with a cluster that could not be re-seeded.
    """
    dm = as_data(data)
    x = dm.values
    h = _check_args(dm, K, alpha, n_starts, max_iter)
    best = None
    failures = 0
    last_error = None
    for start in range(n_starts):
        rng = np.random.default_rng(seed_sequence(seed, start))
        try:
            result = _one_restart(x, K, h, max_iter, tol, rng)
        except DegenerateCluster as exc:
            failures += 1
            last_error = exc
            continue
        if best is None or result[2] < best[1][2]:
            best = (start, result)
    if best is None:
        raise DegenerateCluster(f"all {n_starts} restarts degenerated: {last_error}")
    start, (centers, labels, obj, iters, converged, history) = best
    return _package(x, K, centers, labels, obj, iters, converged, history, start, failures, alpha)


def fit_kmeans(
    data,
    K: int,
    n_starts: int = DEFAULT_N_STARTS,
    max_iter: int = DEFAULT_MAX_ITER,
    tol: float = DEFAULT_TOL,
    seed: int = 0,
) -> TkmFit:
    """Plain k-means: :func:`fit_tkmeans` with ``alpha=0``."""
    return fit_tkmeans(data, K, 0.0, n_starts, max_iter, tol, seed)


def _package(x, K, centers, labels, obj, iters, converged, history, start, failures, alpha) -> TkmFit:
    p = x.shape[1]
    kept = labels > 0
    comp = labels[kept] - 1
    sizes = np.bincount(comp, minlength=K)
    resid = x[kept] - centers[comp]
    sse = np.bincount(comp, weights=(resid**2).sum(axis=1), minlength=K)
    iso = np.zeros((K, p, p))
    emp = np.zeros((K, p, p))
    for j in range(K):
        if sizes[j] == 0:
            continue
        iso[j] = np.eye(p) * sse[j] / (p * sizes[j])
        rj = resid[comp == j]
        emp[j] = rj.T @ rj / sizes[j]
    model = ClusterModel(centers, iso, sizes, sizes / sizes.sum(), covariance_kind="isotropic")
    emp.setflags(write=False)
    return TkmFit(
        model=model,
        partition=Partition(labels, K),
        objective=obj,
        iterations=iters,
        converged=converged,
        empirical_covariances=emp,
        history=tuple(history),
        restart=start,
        failed_restarts=failures,
        alpha=alpha,
    )
