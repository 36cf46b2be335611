"""Trimmed Gaussian clustering with an eigenvalue-ratio restriction (TCLUST).

The fitted criterion is the trimmed classification log-likelihood

    sum over kept i of  log pi_j(i) + log phi(x_i; mu_j(i), Sigma_j(i))

where every kept point sits in the component with the largest weighted
density.  All eigenvalues of all covariance matrices are forced into a common
interval [m, r*m]; with r = 1 every component is the same multiple of the
identity and the method reduces to trimmed k-means with weights.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import checks
from .constants import DEFAULT_MAX_ITER, DEFAULT_N_STARTS, DEFAULT_R_TCLUST, DEFAULT_TOL
from .errors import AllZeroEigenvalues, DegenerateCluster, FitError, InputError, SingularCovariance
from .model import ClusterModel, Partition, as_data, seed_sequence
from .trimmed_kmeans import _check_args, argmin_rows, concentrate, kmeanspp_seeds, smallest_mask

_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class TclustFit:
    model: ClusterModel
    partition: Partition
    log_objective: float
    iterations: int
    converged: bool
    restriction: float
    eigenvalues: np.ndarray
    history: tuple[float, ...] = ()
    restart: int = 0
    failed_restarts: int = 0
    alpha: float = 0.0

    @property
    def components(self) -> np.ndarray:
        return self.partition.labels - 1


def _truncation_cost(d: np.ndarray, w: np.ndarray, m: float, r: float) -> float:
    t = np.clip(d, m, r * m)
    return float((w[:, None] * (np.log(t) + d / t)).sum())


def optimal_truncation_level(eigs, sizes, r: float) -> float:
    """Scalar m minimising sum_j size_j sum_l [log t_jl + d_jl / t_jl], t = clamp(d, m, r m).

    On each interval between consecutive breakpoints {d_jl} U {d_jl / r} the
    cost is A log m + B / m + const, minimised at m = B / A; the global
    minimiser is the best of the clipped interval minimisers.
    """
    d = np.asarray(eigs, dtype=float)
    w = np.asarray(sizes, dtype=float)
    if not np.any(w > 0):
        w = np.ones_like(w)
    active = w > 0
    if np.all(d[active] == 0):
        raise AllZeroEigenvalues("every eigenvalue is zero; the restriction is undefined")
    da, wa = d[active], w[active]
    flat_d = da.ravel()
    flat_w = np.repeat(wa, da.shape[1])
    pos = flat_d[flat_d > 0]
    breaks = np.unique(np.concatenate([pos, pos / r]))
    edges = np.concatenate([[0.0], breaks, [np.inf]])
    best_m, best_cost = None, np.inf
    for lo, hi in zip(edges[:-1], edges[1:]):
        probe = 0.5 * (lo + hi) if np.isfinite(hi) else lo * 2 + 1
        if probe <= 0:
            continue
        below = flat_d < probe
        above = flat_d > r * probe
        a = flat_w[below].sum() + flat_w[above].sum()
        b = (flat_w[below] * flat_d[below]).sum() + (flat_w[above] * flat_d[above]).sum() / r
        if a == 0:
            m = probe
        else:
            m = b / a
            m = min(max(m, lo), hi)
        if m <= 0:
            continue
        cost = _truncation_cost(da, wa, m, r)
        if cost < best_cost:
            best_m, best_cost = m, cost
    return float(best_m)


def restrict_eigenvalues(eigs, sizes, r: float) -> np.ndarray:
    """Clamp all eigenvalues jointly into [m, r m] with the optimal common m.

    Parameters
    ----------
    eigs : array-like, shape (K, p)
        Non-negative eigenvalues of each component's scatter matrix.
    sizes : array-like, shape (K,)
        Component sizes used as weights; components of size 0 are clamped but
        do not influence m.
    r : float
        Restriction factor, >= 1.

    Returns
    -------
    ndarray, shape (K, p)
        Equal to the input when it already satisfies the ratio bound with all
        eigenvalues positive.
    """
    d = np.atleast_2d(np.asarray(eigs, dtype=float))
    w = np.asarray(sizes, dtype=float)
    if r < 1:
        raise InputError(f"restriction factor must be >= 1, got {r}")
    if np.any(d < 0) or np.any(w < 0):
        raise InputError("eigenvalues and sizes must be non-negative")
    if w.shape != (d.shape[0],):
        raise InputError("need one size per component")
    if d.min() > 0 and d.max() <= r * d.min():
        return d.copy()
    m = optimal_truncation_level(d, w, r)
    return np.clip(d, m, r * m)


def _estimate(x, labels, K, r):
    """Constrained ML estimates given a hard assignment (labels 1..K, 0 trimmed)."""
    p = x.shape[1]
    kept = labels > 0
    comp = labels[kept] - 1
    xk = x[kept]
    sizes = np.bincount(comp, minlength=K)
    mu = np.zeros((K, p))
    eig = np.zeros((K, p))
    vecs = np.tile(np.eye(p), (K, 1, 1))
    for j in range(K):
        if sizes[j] == 0:
            continue
        xj = xk[comp == j]
        mu[j] = xj.mean(axis=0)
        c = xj - mu[j]
        s = c.T @ c / sizes[j]
        vals, v = np.linalg.eigh((s + s.T) / 2)
        eig[j] = np.maximum(vals, 0.0)
        vecs[j] = v
    try:
        eig = restrict_eigenvalues(eig, sizes, r)
    except AllZeroEigenvalues as exc:
        raise SingularCovariance(str(exc)) from exc
    weights = sizes / sizes.sum()
    return mu, eig, vecs, weights, sizes


def _log_densities(x, mu, eig, vecs, weights):
    """K x n matrix of log(pi_j) + log phi(x; mu_j, Sigma_j)."""
    n, p = x.shape
    K = mu.shape[0]
    out = np.empty((K, n))
    with np.errstate(divide="ignore"):
        logw = np.log(weights)
    for j in range(K):
        y = (x - mu[j]) @ vecs[j]
        maha = (y * y / eig[j]).sum(axis=1)
        out[j] = logw[j] - 0.5 * (p * _LOG_2PI + np.log(eig[j]).sum() + maha)
    return out


def _recompose(eig, vecs):
    return np.einsum("kij,kj,klj->kil", vecs, eig, vecs)


def _one_restart(x, K, h, r, max_iter, tol, rng):
    centers = kmeanspp_seeds(x, K, rng, h)
    labels, _, _, _ = concentrate(x, centers, h)
    if np.bincount(labels[labels > 0] - 1, minlength=K).min() == 0:
        raise DegenerateCluster("initial assignment left a component empty")
    mu, eig, vecs, weights, sizes = _estimate(x, labels, K, r)
    checks.eigen_ratio(_recompose(eig, vecs), r)
    history = []
    prev_labels = None
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        ll = _log_densities(x, mu, eig, vecs, weights)
        assign, neg_best = argmin_rows(-ll)  # first maximum, as argmax would pick
        best = -neg_best
        keep = smallest_mask(-best, h)
        labels = np.where(keep, assign + 1, 0)
        obj = float(best[keep].sum())
        if history:
            checks.non_decreasing(history[-1], obj, "trimmed classification log-likelihood")
        history.append(obj)
        if prev_labels is not None and np.array_equal(labels, prev_labels):
            converged = True
            break
        if len(history) > 1 and obj - history[-2] <= tol * abs(history[-2]):
            converged = True
            break
        prev_labels = labels
        if np.bincount(assign[keep], minlength=K).min() == 0:
            # an empty component has weight 0 and can never be chosen again
            raise DegenerateCluster("a component lost all its points")
        mu, eig, vecs, weights, sizes = _estimate(x, labels, K, r)
        checks.eigen_ratio(_recompose(eig, vecs), r)
    return mu, eig, vecs, weights, labels, obj, it, converged, history


def fit_tclust(
    data,
    K: int,
    alpha: float = 0.0,
    r: float = DEFAULT_R_TCLUST,
    n_starts: int = DEFAULT_N_STARTS,
    max_iter: int = DEFAULT_MAX_ITER,
    tol: float = DEFAULT_TOL,
    seed: int = 0,
) -> TclustFit:
    """Fit K restricted Gaussian components to the floor(n(1-alpha)) most typical points.

    Each restart starts from k-means++ seeds followed by one nearest-centroid
    assignment, then alternates hard assignment/trimming on the weighted
    log-densities with constrained parameter updates.  The restart with the
    largest trimmed log-likelihood wins (ties -> lowest restart index).

    Raises
    ------
    AlphaOutOfRange, KTooLarge, InputError
        Invalid arguments (including r < 1).
    DegenerateCluster, SingularCovariance
        If every restart failed for that reason.
    """
    dm = as_data(data)
    x = dm.values
    h = _check_args(dm, K, alpha, n_starts, max_iter)
    if not r >= 1:
        raise InputError(f"restriction factor must be >= 1, got {r}")
    best = None
    failures = 0
    last_error: FitError | None = None
    for start in range(n_starts):
        rng = np.random.default_rng(seed_sequence(seed, start))
        try:
            result = _one_restart(x, K, h, r, max_iter, tol, rng)
        except (DegenerateCluster, SingularCovariance) as exc:
            failures += 1
            last_error = exc
            continue
        if best is None or result[5] > best[1][5]:
            best = (start, result)
    if best is None:
        raise type(last_error)(f"all {n_starts} restarts failed: {last_error}")
    start, (mu, eig, vecs, weights, labels, obj, iters, converged, history) = best
    sizes = np.bincount(labels[labels > 0] - 1, minlength=K)
    model = ClusterModel(mu, _recompose(eig, vecs), sizes, sizes / sizes.sum(), covariance_kind="restricted")
    eig = eig.copy()
    eig.setflags(write=False)
    return TclustFit(
        model=model,
        partition=Partition(labels, K),
        log_objective=obj,
        iterations=iters,
        converged=converged,
        restriction=float(r),
        eigenvalues=eig,
        history=tuple(history),
        restart=start,
        failed_restarts=failures,
        alpha=alpha,
    )
