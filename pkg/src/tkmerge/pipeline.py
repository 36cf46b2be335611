"""Two-step robust clustering: inflated first-step fit, then merge to K groups.

Step one fits k > K components with trimming (trimmed k-means when r = 1,
TCLUST otherwise).  Step two builds a k x k dissimilarity between the
components, agglomerates them with a linkage and cuts the tree at K groups.
Every kept observation inherits its component's group; trimmed observations
stay 0.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Union

import numpy as np

from .agglomerate import MergeResult, merge_components
from .constants import DEFAULT_MAX_ITER, DEFAULT_N_MC, DEFAULT_N_STARTS, DEFAULT_R_TCMERGE, DEFAULT_TOL
from .errors import InputError, KGreaterThank, KTooLarge
from .model import FitConfig, Partition, as_data, retained_count
from .tclust import TclustFit, fit_tclust
from .trimmed_kmeans import TkmFit, fit_tkmeans

K_HEURISTICS = ("2logn", "logn", "2Klogn")

_METRIC_ALIASES = {"euclid": "euclidean_centroid", "euclidean": "euclidean_centroid",
                   "euclidean_centroid": "euclidean_centroid", "demp": "demp_mc", "demp_mc": "demp_mc"}


@dataclass(frozen=True)
class PipelineResult:
    final_partition: Partition
    first_step: Union[TkmFit, TclustFit]
    merge: MergeResult
    config_echo: FitConfig
    wall_time_s: float
    method: str  # "tk-merge" or "tc-merge"

    @property
    def routed_to_tkmeans(self) -> bool:
        return isinstance(self.first_step, TkmFit)


def default_k(n: int, method: str = "tkm", K: int = 1) -> int:
    """Inflated number of components from natural-log heuristics.

    ``"tkm"`` / ``"2logn"``: round(2 ln n); ``"tc"`` / ``"logn"``: round(ln n);
    ``"2Klogn"``: round(2 K ln n).  Callers clamp the result to at least K + 1.
    """
    if n < 8:
        raise InputError("the k heuristics need n >= 8")
    ln = math.log(n)
    if method in ("tkm", "2logn"):
        return int(round(2 * ln))
    if method in ("tc", "logn"):
        return int(round(ln))
    if method == "2Klogn":
        return int(round(2 * K * ln))
    raise InputError(f"unknown k heuristic {method!r}")


def resolve_k(n: int, K: int, heuristic: str) -> int:
    """Heuristic k clamped to [K + 1, n] (or K when K + 1 would exceed n)."""
    return min(max(default_k(n, heuristic, K), K + 1), n)


def _normalise_metric(metric: str) -> str:
    try:
        return _METRIC_ALIASES[metric]
    except KeyError:
        raise InputError(f"unknown metric {metric!r}") from None


def _relabel(first_labels: np.ndarray, component_to_group: np.ndarray) -> np.ndarray:
    table = np.concatenate([[0], component_to_group])
    return table[first_labels]


def _finish(data, K, first, cfg, n_mc, t0, method):
    merge = merge_components(first.model, K, cfg.metric, cfg.linkage, n_mc, cfg.seed)
    labels = _relabel(first.partition.labels, merge.component_to_group)
    final = Partition(labels, K)
    return PipelineResult(final, first, merge, cfg, time.perf_counter() - t0, method)


def _check(dm, K, k, alpha):
    if K > k:
        raise KGreaterThank(f"K={K} exceeds the number of components k={k}")
    h = retained_count(dm.n, alpha)
    if k > h:
        raise KTooLarge(f"k={k} exceeds the retained count floor(n(1-alpha))={h}")


def fit_tk_merge(data, K: int, k: int, alpha: float = 0.0, n_starts: int = DEFAULT_N_STARTS,
                 max_iter: int = DEFAULT_MAX_ITER, tol: float = DEFAULT_TOL, seed: int = 0,
                 linkage: str = "single", metric: str = "euclidean_centroid",
                 n_mc: int = DEFAULT_N_MC) -> PipelineResult:
    """Trimmed k-means with ``k`` components, then merge to ``K`` groups.

    Defaults follow the easy-to-compute choice: Euclidean distances between
    centroids and single linkage.
    """
    t0 = time.perf_counter()
    dm = as_data(data)
    _check(dm, K, k, alpha)
    cfg = FitConfig(K=K, k=k, alpha=alpha, r=1.0, metric=_normalise_metric(metric), linkage=linkage,
                    n_starts=n_starts, max_iter=max_iter, tol=tol, seed=seed)
    first = fit_tkmeans(dm, k, alpha, n_starts, max_iter, tol, seed)
    return _finish(dm, K, first, cfg, n_mc, t0, "tk-merge")


def fit_tc_merge(data, K: int, k: int, alpha: float = 0.0, r: float = DEFAULT_R_TCMERGE,
                 n_starts: int = DEFAULT_N_STARTS, max_iter: int = DEFAULT_MAX_ITER, tol: float = DEFAULT_TOL,
                 seed: int = 0, linkage: str = "single", metric: str = "euclidean_centroid",
                 n_mc: int = DEFAULT_N_MC) -> PipelineResult:
    """TCLUST with ``k`` components and restriction ``r``, then merge to ``K`` groups.

    ``r == 1`` takes the trimmed k-means branch and returns exactly what
    :func:`fit_tk_merge` returns for the same arguments.
    """
    if r == 1:
        return fit_tk_merge(data, K, k, alpha, n_starts, max_iter, tol, seed, linkage, metric, n_mc)
    t0 = time.perf_counter()
    dm = as_data(data)
    _check(dm, K, k, alpha)
    cfg = FitConfig(K=K, k=k, alpha=alpha, r=r, metric=_normalise_metric(metric), linkage=linkage,
                    n_starts=n_starts, max_iter=max_iter, tol=tol, seed=seed)
    first = fit_tclust(dm, k, alpha, r, n_starts, max_iter, tol, seed)
    return _finish(dm, K, first, cfg, n_mc, t0, "tc-merge")


def fit(data, config: FitConfig, n_mc: int = DEFAULT_N_MC) -> PipelineResult:
    """Run the procedure described by a :class:`FitConfig`."""
    if config.r == 1:
        return fit_tk_merge(data, config.K, config.k, config.alpha, config.n_starts, config.max_iter,
                            config.tol, config.seed, config.linkage, config.metric, n_mc)
    return fit_tc_merge(data, config.K, config.k, config.alpha, config.r, config.n_starts, config.max_iter,
                        config.tol, config.seed, config.linkage, config.metric, n_mc)
