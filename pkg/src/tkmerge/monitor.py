"""Trimming-level monitoring: sweep alpha over a grid and score stability.

The first-step fit (trimmed k-means, or TCLUST) is run at every level of a
descending grid with the same seed, so neighbouring levels differ only
through alpha.  Neighbouring partitions are compared with the adjusted Rand
index over the observations both levels keep.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constants import DEFAULT_MAX_ITER, DEFAULT_N_STARTS, DEFAULT_R_TCMERGE, DEFAULT_TOL
from .errors import AllLevelsFailed, GridTooShort, InputError, TkMergeError
from .metrics import ari
from .model import Partition, as_data
from .tclust import fit_tclust
from .trimmed_kmeans import fit_tkmeans

DEFAULT_GRID = tuple(round(0.40 - 0.05 * i, 2) for i in range(9))
TARGETS = ("consecutive", "smallest", "truth")
TIE_TOL = 1e-9


@dataclass(frozen=True)
class MonitorTrace:
    alphas: tuple
    partitions: tuple  # Partition per level, None where the fit failed
    scores: tuple  # one per adjacent pair, restricted to jointly kept points
    unrestricted: tuple  # same pairs, trimmed label 0 counted as a class
    best_alpha: float
    method: str
    r_used: float
    target: str = "consecutive"
    failures: tuple = ()  # (alpha, message)
    level_scores: tuple = ()  # per-level score the choice is made on
    truth_scores: tuple = ()  # per level, only with target="truth"

    @property
    def n_trimmed(self) -> tuple:
        return tuple(p.n_trimmed if p is not None else -1 for p in self.partitions)

    def to_rows(self) -> list:
        """Rows for CSV export; the score on row t compares level t with level t-1."""
        rows = []
        for t, a in enumerate(self.alphas):
            rows.append({
                "alpha": a,
                "score_consecutive": self.scores[t - 1] if t else float("nan"),
                "score_unrestricted": self.unrestricted[t - 1] if t else float("nan"),
                "n_trimmed": self.n_trimmed[t],
            })
        return rows


def check_grid(grid) -> tuple:
    g = tuple(float(v) for v in grid)
    if len(g) < 2:
        raise GridTooShort("the monitoring grid needs at least two levels")
    if any(not 0.0 <= v <= 0.5 for v in g):
        raise InputError("grid levels must lie in [0, 0.5]")
    if any(b >= a for a, b in zip(g, g[1:])):
        raise InputError("grid must be strictly descending")
    return g


def restricted_ari(a: Partition, b: Partition) -> float:
    """ARI over the observations kept (label > 0) by both partitions."""
    both = (a.labels > 0) & (b.labels > 0)
    return ari(a.labels[both], b.labels[both])


def _score(a, b, restrict):
    if a is None or b is None:
        return float("nan")
    return restricted_ari(a, b) if restrict else ari(a, b)


def monitor_alpha(data, k: int, method: str = "tkm", r: float | None = None, grid=None, seed: int = 0,
                  target: str = "consecutive", truth=None, n_starts: int = DEFAULT_N_STARTS,
                  max_iter: int = DEFAULT_MAX_ITER, tol: float = DEFAULT_TOL) -> MonitorTrace:
    """Fit at every trimming level and pick the most stable one.

    Parameters
    ----------
    data : array-like, shape (n, p)
    k : int
        Number of first-step components (usually the inflated k).
    method : {"tkm", "tc"}
        Trimmed k-means, or TCLUST with restriction ``r`` (default 64).
    grid : sequence of float, optional
        Strictly descending levels in [0, 0.5]; default 0.40, 0.35, ..., 0.00.
    target : {"consecutive", "smallest", "truth"}
        What each level is compared with: the next smaller level, the
        smallest level of the grid, or the ``truth`` labels.

    Returns
    -------
    MonitorTrace
        With ``target="consecutive"`` each level is scored by its lower
        restricted ARI with the two neighbouring levels (see
        :func:`level_stability`); with the other targets by its ARI against
        the reference.  ``best_alpha`` is chosen by :func:`pick_level`.

    Raises
    ------
    GridTooShort
        Fewer than two levels.
    AllLevelsFailed
        No level produced a fit.
    """
    if method not in ("tkm", "tc"):
        raise InputError(f"method must be 'tkm' or 'tc', got {method!r}")
    if target not in TARGETS:
        raise InputError(f"target must be one of {TARGETS}")
    if target == "truth" and truth is None:
        raise InputError("target='truth' needs truth labels")
    alphas = check_grid(DEFAULT_GRID if grid is None else grid)
    dm = as_data(data)
    r_used = 1.0 if method == "tkm" else float(DEFAULT_R_TCMERGE if r is None else r)
    parts, failures = [], []
    for a in alphas:
        try:
            if method == "tkm":
                fit = fit_tkmeans(dm, k, a, n_starts, max_iter, tol, seed)
            else:
                fit = fit_tclust(dm, k, a, r_used, n_starts, max_iter, tol, seed)
            parts.append(fit.partition)
        except TkMergeError as exc:
            parts.append(None)
            failures.append((a, f"{type(exc).__name__}: {exc}"))
    if all(p is None for p in parts):
        raise AllLevelsFailed(f"every level failed; first error: {failures[0][1]}")
    scores = tuple(_score(parts[t], parts[t + 1], True) for t in range(len(alphas) - 1))
    unrestricted = tuple(_score(parts[t], parts[t + 1], False) for t in range(len(alphas) - 1))
    truth_scores = ()
    if target == "consecutive":
        level_scores = level_stability(scores)
    elif target == "smallest":
        ref = parts[-1]
        level_scores = [_score(p, ref, True) if t < len(parts) - 1 else float("nan")
                        for t, p in enumerate(parts)]
    else:
        truth_labels = np.asarray(truth.labels if isinstance(truth, Partition) else truth)
        level_scores = [ari(p.labels, truth_labels) if p is not None else float("nan") for p in parts]
        truth_scores = tuple(level_scores)
    best_alpha = pick_level(alphas, level_scores)
    return MonitorTrace(alphas, tuple(parts), scores, unrestricted, best_alpha, method, r_used, target,
                        tuple(failures), tuple(level_scores), truth_scores)


def level_stability(scores) -> list:
    """Per-level stability: the worst agreement with either neighbouring level.

    Grid ends have a single neighbour.  NaN (failed neighbour) counts as no
    agreement.
    """
    s = [v if np.isfinite(v) else -1.0 for v in scores]
    out = []
    for t in range(len(s) + 1):
        near = [s[i] for i in (t - 1, t) if 0 <= i < len(s)]
        out.append(min(near))
    return out


def pick_level(alphas, level_scores, tie_tol: float = TIE_TOL) -> float:
    """Smallest level of the first run of top-scoring levels, scanning from the largest alpha.

    Going down from heavy trimming, the fit keeps the same structure until
    contamination starts to enter; the last level before the score leaves its
    maximum is returned.  Scores within ``tie_tol`` of the maximum count as tied.
    """
    v = np.array([x if np.isfinite(x) else -np.inf for x in level_scores])
    if not np.isfinite(v).any():
        return float(alphas[-1])
    top = v >= v.max() - tie_tol
    t = int(np.argmax(top))
    while t + 1 < len(v) and top[t + 1]:
        t += 1
    return float(alphas[t])
