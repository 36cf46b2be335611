"""Evaluation: adjusted Rand index and robust summaries of replications."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constants import SN_CONSTANT
from .errors import EmptyVector, LengthMismatch, TooFewValues
from .model import Partition


@dataclass(frozen=True)
class Score:
    ari: float
    n_items: int


def _labels(a) -> np.ndarray:
    return a.labels if isinstance(a, Partition) else np.asarray(a)


def _comb2(v):
    v = np.asarray(v, dtype=np.int64)
    return int((v * (v - 1) // 2).sum())


def _same_up_to_relabel(a: np.ndarray, b: np.ndarray) -> bool:
    _, ia = np.unique(a, return_inverse=True)
    _, ib = np.unique(b, return_inverse=True)
    pairs = np.unique(np.stack([ia, ib]), axis=1)
    return pairs.shape[1] == ia.max(initial=-1) + 1 == ib.max(initial=-1) + 1


def ari(a, b) -> float:
    """Adjusted Rand index between two labelings.

    Label 0 (trimmed) is an ordinary class, so outlier detection counts
    towards agreement.  When the chance-corrected denominator vanishes the
    result is 1.0 for partitions identical up to relabeling, else 0.0.
    """
    la, lb = _labels(a).ravel(), _labels(b).ravel()
    if la.shape != lb.shape:
        raise LengthMismatch(f"label vectors differ in length: {la.size} vs {lb.size}")
    n = la.size
    if n < 2:
        return 1.0
    _, ia = np.unique(la, return_inverse=True)
    _, ib = np.unique(lb, return_inverse=True)
    table = np.zeros((ia.max() + 1, ib.max() + 1), dtype=np.int64)
    np.add.at(table, (ia, ib), 1)
    index = _comb2(table)
    sum_a = _comb2(table.sum(axis=1))
    sum_b = _comb2(table.sum(axis=0))
    total = n * (n - 1) // 2
    expected = sum_a * sum_b / total
    maximum = (sum_a + sum_b) / 2
    if maximum == expected:
        return 1.0 if _same_up_to_relabel(la, lb) else 0.0
    return float((index - expected) / (maximum - expected))


def score(a, b) -> Score:
    return Score(ari(a, b), int(_labels(a).size))


def median(x) -> float:
    """Median; the mean of the two central values for even lengths."""
    v = np.sort(np.asarray(x, dtype=float).ravel())
    if v.size == 0:
        raise EmptyVector("median of an empty vector")
    mid = v.size // 2
    return float(v[mid]) if v.size % 2 else float((v[mid - 1] + v[mid]) / 2)


def _kth_pairwise(xs: np.ndarray, i: int, kth: int) -> float:
    """kth smallest (1-based) of |xs[i] - xs[j]| over all j, xs sorted ascending.

    The distances to the left and to the right of i form two sorted runs; the
    kth smallest of their union is found by bisection on the left count.
    """
    left = xs[i] - xs[i::-1]  # includes j = i (distance 0)
    right = xs[i + 1:] - xs[i]
    lo, hi = max(0, kth - right.size), min(kth, left.size)
    while lo < hi:
        a = (lo + hi) // 2  # take a from left, kth - a from right
        if left[a] < right[kth - a - 1]:
            lo = a + 1
        else:
            hi = a
    a = lo
    cands = []
    if a > 0:
        cands.append(left[a - 1])
    if kth - a > 0:
        cands.append(right[kth - a - 1])
    return float(max(cands))


def sn_scale(x) -> float:
    """Rousseeuw-Croux Sn scale estimator, c * lomed_i himed_j |x_i - x_j|.

    The inner high median is the (floor(n/2) + 1)-th order statistic of the n
    distances from x_i (j = i included); the outer low median is the
    floor((n+1)/2)-th order statistic.  c = 1.1926; no small-sample factor.
    """
    v = np.sort(np.asarray(x, dtype=float).ravel())
    n = v.size
    if n < 2:
        raise TooFewValues("Sn needs at least two values")
    inner_k = n // 2 + 1
    inner = np.array([_kth_pairwise(v, i, inner_k) for i in range(n)])
    outer_k = (n + 1) // 2
    return SN_CONSTANT * float(np.partition(inner, outer_k - 1)[outer_k - 1])


def summarize(x) -> dict:
    """Median and Sn of a replication sample (Sn is 0 for a single value)."""
    v = np.asarray(x, dtype=float).ravel()
    v = v[np.isfinite(v)]
    if v.size == 0:
        return {"median": float("nan"), "sn": float("nan"), "n": 0}
    return {"median": median(v), "sn": sn_scale(v) if v.size > 1 else 0.0, "n": int(v.size)}


def percentage_gain(t_method: float, t_reference: float) -> float:
    """Computing-time gain |t_i - t_T| / t_T * 100 of a method against a reference."""
    return abs(t_method - t_reference) / t_reference * 100.0
