"""Dissimilarities between fitted components and their hierarchical merging."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constants import DEFAULT_N_MC, PSD_TOL
from .errors import InputError, KOutOfRange, NonPsdCovariance
from .model import LINKAGES, ClusterModel, Dendrogram, Dissimilarity, Merge, seed_sequence


@dataclass(frozen=True)
class MergeResult:
    dendrogram: Dendrogram
    component_to_group: np.ndarray  # length k, values 1..K

    @property
    def n_groups(self) -> int:
        return int(self.component_to_group.max())


def centroid_dissimilarity(model: ClusterModel) -> Dissimilarity:
    """Euclidean distances between component centroids."""
    c = model.centroids
    if c.shape[0] < 2:
        raise InputError("need at least two components")
    diff = c[:, None, :] - c[None, :, :]
    d = np.sqrt((diff**2).sum(axis=-1))
    d = np.maximum(d, d.T)
    np.fill_diagonal(d, 0.0)
    return Dissimilarity(d, "euclidean_centroid")


def _factor(cov: np.ndarray):
    """Eigen-factorisation with a small floor so singular covariances have a density."""
    vals, vecs = np.linalg.eigh((cov + cov.T) / 2)
    scale = max(1.0, float(np.abs(vals).max(initial=0.0)))
    if vals.min(initial=0.0) < PSD_TOL * scale:
        raise NonPsdCovariance(f"covariance has eigenvalue {vals.min()} < 0")
    floor = 1e-12 * max(float(vals.max(initial=0.0)), 1e-300)
    return np.maximum(vals, floor), vecs


def _logpdf(x, mean, vals, vecs):
    y = (x - mean) @ vecs
    return -0.5 * ((y * y / vals).sum(axis=1) + np.log(vals).sum() + x.shape[1] * np.log(2 * np.pi))


def demp_dissimilarity(model: ClusterModel, n_mc: int = DEFAULT_N_MC, seed: int = 0) -> Dissimilarity:
    """Monte-Carlo misclassification-based dissimilarity between Gaussian components.

    For every ordered pair (i, j) draw ``n_mc`` points from N(mu_i, Sigma_i)
    and estimate P(i -> j) = P(pi_j phi_j(X) > pi_i phi_i(X)), counting exact
    density ties as 1/2.  The pair overlap is
    omega_ij = pi_i P(i -> j) + pi_j P(j -> i) and d_ij = max(0, 1 - omega_ij).
    Each ordered pair uses its own stream ``SeedSequence([seed, i, j])``.
    """
    if n_mc < 1000:
        raise InputError(f"n_mc must be at least 1000, got {n_mc}")
    k = model.k
    if k < 2:
        raise InputError("need at least two components")
    factors = [_factor(s) for s in model.covariances]
    w = model.weights
    with np.errstate(divide="ignore"):
        logw = np.log(w)
    miscl = np.zeros((k, k))
    for i in range(k):
        vals_i, vecs_i = factors[i]
        for j in range(k):
            if i == j:
                continue
            rng = np.random.default_rng(seed_sequence(seed, i, j))
            z = rng.standard_normal((n_mc, model.p))
            x = model.centroids[i] + (z * np.sqrt(vals_i)) @ vecs_i.T
            li = logw[i] + _logpdf(x, model.centroids[i], vals_i, vecs_i)
            lj = logw[j] + _logpdf(x, model.centroids[j], *factors[j])
            miscl[i, j] = (np.count_nonzero(lj > li) + 0.5 * np.count_nonzero(lj == li)) / n_mc
    omega = w[:, None] * miscl + (w[:, None] * miscl).T
    d = np.clip(1.0 - omega, 0.0, None)
    np.fill_diagonal(d, 0.0)
    return Dissimilarity(d, "demp_mc")


def _min_leaf(members: dict[int, list[int]], node: int) -> int:
    return min(members[node])


def linkage_merge(d, linkage: str = "single") -> Dendrogram:
    """Agglomerate k nodes using a stored dissimilarity matrix.

    At each step the active pair with the smallest dissimilarity merges; ties
    go to the lexicographically smallest (lower id, higher id) pair.  Distances
    to the new node follow the linkage: single = min, complete = max,
    average = size-weighted mean.  Each recorded merge lists first the node
    holding the smaller leaf id.
    """
    if linkage not in LINKAGES:
        raise InputError(f"unknown linkage {linkage!r}")
    mat = d.d if isinstance(d, Dissimilarity) else np.asarray(d, dtype=float)
    k = mat.shape[0]
    if k < 2:
        raise InputError("need at least two nodes to merge")
    size = 2 * k - 1
    dist = np.full((size, size), np.inf)
    dist[:k, :k] = mat
    active = list(range(k))
    counts = {i: 1 for i in range(k)}
    members = {i: [i] for i in range(k)}
    merges = []
    for step in range(k - 1):
        best = None
        for ai, a in enumerate(active):
            for b in active[ai + 1:]:
                val = dist[a, b]
                if best is None or val < best[0]:
                    best = (val, a, b)
        height, a, b = best
        new = k + step
        for c in active:
            if c in (a, b):
                continue
            da, db = dist[a, c], dist[b, c]
            if linkage == "single":
                v = min(da, db)
            elif linkage == "complete":
                v = max(da, db)
            else:
                v = (counts[a] * da + counts[b] * db) / (counts[a] + counts[b])
            dist[new, c] = dist[c, new] = v
        left, right = (a, b) if _min_leaf(members, a) < _min_leaf(members, b) else (b, a)
        merges.append(Merge(left, right, float(height), new))
        active = [c for c in active if c not in (a, b)] + [new]
        counts[new] = counts[a] + counts[b]
        members[new] = members[a] + members[b]
    return Dendrogram(tuple(merges), k, linkage)


def cut_tree(dend: Dendrogram, K: int) -> np.ndarray:
    """Group labels (1..K) per leaf after undoing the last K-1 merges.

    Groups are numbered in order of their smallest leaf id.
    """
    k = dend.leaf_count
    if not 1 <= K <= k:
        raise KOutOfRange(f"K must lie in 1..{k}, got {K}")
    parent = list(range(2 * k - 1))

    def find(u):
        while parent[u] != u:
            parent[u] = parent[parent[u]]
            u = parent[u]
        return u

    for m in dend.merges[: k - K]:
        parent[find(m.left)] = m.new
        parent[find(m.right)] = m.new
    roots = [find(i) for i in range(k)]
    order: dict[int, int] = {}
    out = np.empty(k, dtype=np.int64)
    for leaf, root in enumerate(roots):
        out[leaf] = order.setdefault(root, len(order) + 1)
    return out


def merge_components(model: ClusterModel, K: int, metric: str = "euclidean_centroid",
                     linkage: str = "single", n_mc: int = DEFAULT_N_MC, seed: int = 0) -> MergeResult:
    """Dissimilarity, merge and cut in one call."""
    if model.k == 1:
        if K != 1:
            raise KOutOfRange("a single component can only form one group")
        return MergeResult(Dendrogram((), 1, linkage), np.ones(1, dtype=np.int64))
    if metric == "euclidean_centroid":
        diss = centroid_dissimilarity(model)
    elif metric == "demp_mc":
        diss = demp_dissimilarity(model, n_mc, seed)
    else:
        raise InputError(f"unknown metric {metric!r}")
    dend = linkage_merge(diss, linkage)
    return MergeResult(dend, cut_tree(dend, K))
