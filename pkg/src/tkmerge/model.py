"""Domain types shared by the fitting, merging and evaluation modules.

Labels follow one convention everywhere: ``0`` marks a trimmed observation
and ``1..K`` are cluster memberships.  Dendrogram node ids are 0-based, with
leaves ``0..k-1`` and internal nodes ``k..2k-2`` in creation order.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .constants import PSD_TOL, SYMMETRY_TOL, WEIGHT_SUM_TOL
from .errors import AlphaOutOfRange, InputError, KTooLarge, NonFiniteData


def _frozen(a, dtype=None) -> np.ndarray:
    out = np.array(a, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


def retained_count(n: int, alpha: float) -> int:
    """Number of observations kept by a fit with trimming level ``alpha``.

    Computed as floor(n * (1 - alpha)); the product is rounded to 9 decimals
    first so that e.g. n=10, alpha=0.3 gives 7 rather than 6.
    """
    if not 0.0 <= alpha <= 0.5:
        raise AlphaOutOfRange(f"alpha must lie in [0, 0.5], got {alpha}")
    return int(math.floor(round(n * (1.0 - alpha), 9)))


@dataclass(frozen=True)
class DataMatrix:
    """An n x p matrix of finite observations."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] < 1:
            raise InputError(f"data must be a non-empty 2-D matrix, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            bad = np.argwhere(~np.isfinite(v))[0]
            raise NonFiniteData(f"non-finite value at row {bad[0]}, column {bad[1]}")
        object.__setattr__(self, "values", _frozen(v))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]


def as_data(data) -> DataMatrix:
    return data if isinstance(data, DataMatrix) else DataMatrix(data)


def validate_data(data) -> list[str]:
    """Return a list of non-fatal warnings about ``data``.

    Raises
    ------
    NonFiniteData
        If any entry is NaN or infinite.
    """
    dm = as_data(data)
    notes = []
    if dm.n <= dm.p:
        notes.append(f"n <= p ({dm.n} observations, {dm.p} features)")
    if dm.n > 1:
        const = np.flatnonzero(np.ptp(dm.values, axis=0) == 0)
        if const.size:
            notes.append("constant columns: " + ", ".join(str(c) for c in const))
    return notes


@dataclass(frozen=True)
class Partition:
    """Crisp labels over n observations; 0 = trimmed, 1..k_groups = clusters."""

    labels: np.ndarray
    k_groups: int

    def __post_init__(self):
        lab = np.asarray(self.labels)
        if lab.ndim != 1:
            raise InputError("labels must be a 1-D vector")
        if lab.size and not np.issubdtype(lab.dtype, np.integer):
            if not np.all(lab == np.round(lab)):
                raise InputError("labels must be integers")
        lab = lab.astype(np.int64)
        if self.k_groups < 1:
            raise InputError("k_groups must be positive")
        if lab.size and (lab.min() < 0 or lab.max() > self.k_groups):
            raise InputError(f"labels must lie in 0..{self.k_groups}")
        object.__setattr__(self, "labels", _frozen(lab))

    @classmethod
    def from_labels(cls, labels) -> "Partition":
        lab = np.asarray(labels, dtype=np.int64)
        return cls(lab, max(1, int(lab.max(initial=0))))

    @property
    def n(self) -> int:
        return self.labels.size

    @property
    def n_trimmed(self) -> int:
        return int(np.count_nonzero(self.labels == 0))

    @property
    def retained(self) -> np.ndarray:
        return self.labels != 0

    def to_text(self) -> str:
        return "".join(f"{v}\n" for v in self.labels.tolist())

    @classmethod
    def from_text(cls, text: str, k_groups: int | None = None) -> "Partition":
        lab = np.array([int(t) for t in text.split()], dtype=np.int64)
        if k_groups is None:
            return cls.from_labels(lab)
        return cls(lab, k_groups)


@dataclass(frozen=True)
class ClusterModel:
    """Per-component centroid, covariance, size and mixing weight.

    ``covariance_kind`` records where the covariances came from:
    ``"isotropic"`` (trimmed k-means: SSE_j / (p * size_j) * I),
    ``"empirical"`` or ``"restricted"`` (eigenvalue-constrained TCLUST).
    """

    centroids: np.ndarray
    covariances: np.ndarray
    sizes: np.ndarray
    weights: np.ndarray
    covariance_kind: str = "empirical"

    def __post_init__(self):
        c = np.asarray(self.centroids, dtype=float)
        s = np.asarray(self.covariances, dtype=float)
        if c.ndim != 2 or s.shape != (c.shape[0], c.shape[1], c.shape[1]):
            raise InputError("centroids must be k x p and covariances k x p x p")
        object.__setattr__(self, "centroids", _frozen(c))
        object.__setattr__(self, "covariances", _frozen(s))
        object.__setattr__(self, "sizes", _frozen(self.sizes, np.int64))
        object.__setattr__(self, "weights", _frozen(self.weights, float))

    @property
    def k(self) -> int:
        return self.centroids.shape[0]

    @property
    def p(self) -> int:
        return self.centroids.shape[1]

    def check(self) -> None:
        """Assert the structural invariants; raises AssertionError on breach."""
        s = self.covariances
        scale = max(1.0, float(np.abs(s).max(initial=0.0)))
        assert np.all(np.abs(s - np.swapaxes(s, 1, 2)) <= SYMMETRY_TOL * scale), "asymmetric covariance"
        eig = np.linalg.eigvalsh(s) if s.size else np.zeros(0)
        assert np.all(eig >= PSD_TOL * scale), "covariance not PSD"
        assert np.all(self.sizes >= 0)
        assert abs(self.weights.sum() - 1.0) <= WEIGHT_SUM_TOL * max(1, self.k), "weights do not sum to 1"

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "p": self.p,
            "covariance_kind": self.covariance_kind,
            "centroids": self.centroids.tolist(),
            "covariances": self.covariances.tolist(),
            "sizes": self.sizes.tolist(),
            "weights": self.weights.tolist(),
        }


@dataclass(frozen=True)
class Dissimilarity:
    d: np.ndarray
    metric_tag: str = "euclidean_centroid"

    def __post_init__(self):
        d = np.asarray(self.d, dtype=float)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise InputError("dissimilarity must be a square matrix")
        if not np.all(np.isfinite(d)) or np.any(d < 0):
            raise InputError("dissimilarities must be finite and non-negative")
        if np.any(np.diag(d) != 0) or not np.array_equal(d, d.T):
            raise InputError("dissimilarity must be symmetric with a zero diagonal")
        object.__setattr__(self, "d", _frozen(d))

    @property
    def k(self) -> int:
        return self.d.shape[0]


@dataclass(frozen=True)
class Merge:
    left: int
    right: int
    height: float
    new: int


@dataclass(frozen=True)
class Dendrogram:
    merges: tuple[Merge, ...]
    leaf_count: int
    linkage: str = "single"

    def __post_init__(self):
        object.__setattr__(self, "merges", tuple(self.merges))
        if len(self.merges) != self.leaf_count - 1:
            raise InputError("a dendrogram over k leaves has exactly k-1 merges")

    @property
    def heights(self) -> np.ndarray:
        return np.array([m.height for m in self.merges])

    def to_text(self) -> str:
        """Plain-text merge list: one ``left right height`` line per merge."""
        return "".join(f"{m.left} {m.right} {m.height:.12g}\n" for m in self.merges)

    @classmethod
    def from_text(cls, text: str, linkage: str = "single") -> "Dendrogram":
        rows = [ln.split() for ln in text.splitlines() if ln.strip()]
        k = len(rows) + 1
        merges = tuple(Merge(int(a), int(b), float(h), k + i) for i, (a, b, h) in enumerate(rows))
        return cls(merges, k, linkage)


METRICS = ("euclidean_centroid", "demp_mc")
LINKAGES = ("single", "complete", "average")


@dataclass(frozen=True)
class FitConfig:
    """Inputs of the two-step procedure (target groups K, inflated components k, ...)."""

    K: int
    k: int
    alpha: float = 0.0
    r: float = 1.0
    metric: str = "euclidean_centroid"
    linkage: str = "single"
    n_starts: int = 20
    max_iter: int = 100
    tol: float = 1e-8
    seed: int = 0

    def __post_init__(self):
        if not 1 <= self.K <= self.k:
            raise KTooLarge(f"need 1 <= K <= k, got K={self.K}, k={self.k}")
        if not 0.0 <= self.alpha <= 0.5:
            raise AlphaOutOfRange(f"alpha must lie in [0, 0.5], got {self.alpha}")
        if self.r < 1:
            raise InputError(f"restriction factor must be >= 1, got {self.r}")
        if self.metric not in METRICS:
            raise InputError(f"unknown metric {self.metric!r}")
        if self.linkage not in LINKAGES:
            raise InputError(f"unknown linkage {self.linkage!r}")
        if self.n_starts < 1 or self.max_iter < 1:
            raise InputError("n_starts and max_iter must be positive")

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def check_n_vs_p(dm: DataMatrix) -> None:
    if dm.n <= dm.p:
        warnings.warn(f"n <= p ({dm.n} <= {dm.p}); clustering estimates will be unstable", stacklevel=3)


def seed_sequence(seed, *extra: int) -> np.random.SeedSequence:
    """Derive a SeedSequence from a user seed (any 64-bit integer) and indices."""
    return np.random.SeedSequence([int(seed) % 2**64, *[int(e) for e in extra]])


def sizes_of(labels: np.ndarray, k: int) -> np.ndarray:
    lab = np.asarray(labels)
    return np.bincount(lab[lab > 0] - 1, minlength=k)


def relabel_compact(labels: Sequence[int]) -> np.ndarray:
    """Map arbitrary labels onto 1..G by first appearance, keeping 0 as 0."""
    lab = np.asarray(labels, dtype=np.int64)
    out = np.zeros_like(lab)
    mapping: dict[int, int] = {}
    for i, v in enumerate(lab.tolist()):
        if v == 0:
            continue
        if v not in mapping:
            mapping[v] = len(mapping) + 1
        out[i] = mapping[v]
    return out

