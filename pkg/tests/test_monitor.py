import math

import numpy as np
import pytest

from tkmerge import datagen
from tkmerge.errors import AllLevelsFailed, GridTooShort, InputError
from tkmerge.model import Partition
from tkmerge.monitor import DEFAULT_GRID, level_stability, monitor_alpha, pick_level, restricted_ari


def _contaminated(seed):
    # 700 clean points and 300 far-flung ones: exactly 30% of 1000
    ds = datagen.gen_gaussian_mixture(2, 350, 2, 3.0, 5.0, seed)
    return datagen.add_uniform_contamination(ds, 300 / 700, 10.0, seed)


def test_default_grid():
    assert DEFAULT_GRID == (0.4, 0.35, 0.3, 0.25, 0.2, 0.15, 0.1, 0.05, 0.0)


def test_grid_errors(blobs3):
    x, _ = blobs3
    with pytest.raises(GridTooShort):
        monitor_alpha(x, 3, grid=[0.1])
    with pytest.raises(InputError):
        monitor_alpha(x, 3, grid=[0.1, 0.2])
    with pytest.raises(InputError):
        monitor_alpha(x, 3, grid=[0.6, 0.1])
    with pytest.raises(InputError):
        monitor_alpha(x, 3, target="truth")
    with pytest.raises(InputError):
        monitor_alpha(x, 3, method="kmeans")


def test_thirty_percent_outliers_found():
    ds = _contaminated(0)
    assert ds.n == 1000 and ds.n_contaminants == 300
    trace = monitor_alpha(ds.data, 2, seed=0)
    assert trace.best_alpha == pytest.approx(0.30)


def test_clean_data_low_end():
    ds = datagen.gen_gaussian_mixture(2, 500, 2, 3.0, 5.0, 3)
    assert monitor_alpha(ds.data, 2, seed=3).best_alpha <= 0.05


def test_trace_shape_and_rows(blobs3):
    x, _ = blobs3
    trace = monitor_alpha(x, 3, method="tc", grid=[0.2, 0.1, 0.0], seed=1, n_starts=3)
    assert trace.r_used == 64.0 and trace.method == "tc"
    assert len(trace.partitions) == 3 and len(trace.scores) == 2 == len(trace.unrestricted)
    assert trace.best_alpha in trace.alphas
    assert trace.n_trimmed == (60, 30, 0)
    rows = trace.to_rows()
    assert [r["alpha"] for r in rows] == [0.2, 0.1, 0.0]
    assert math.isnan(rows[0]["score_consecutive"])
    assert rows[1]["score_consecutive"] == trace.scores[0]
    assert all(-1 <= s <= 1 for s in trace.scores)


def test_deterministic(blobs3):
    x, _ = blobs3
    a = monitor_alpha(x, 4, grid=[0.3, 0.2, 0.1], seed=8)
    b = monitor_alpha(x, 4, grid=[0.3, 0.2, 0.1], seed=8)
    assert a.scores == b.scores and a.best_alpha == b.best_alpha


def test_truth_and_smallest_targets():
    ds = _contaminated(1)
    tr = monitor_alpha(ds.data, 2, seed=1, target="truth", truth=ds.truth)
    assert len(tr.truth_scores) == len(tr.alphas)
    assert tr.best_alpha == pytest.approx(0.30)
    sm = monitor_alpha(ds.data, 2, grid=[0.3, 0.2, 0.0], seed=1, target="smallest")
    assert math.isnan(sm.level_scores[-1])


def test_failed_levels_are_recorded():
    x = np.vstack([np.zeros((6, 2)), [[1.0, 1.0], [2.0, 2.0]]])
    # at alpha 0.25 only the six identical points remain, so two clusters cannot form
    trace = monitor_alpha(x, 2, grid=[0.25, 0.0], n_starts=2)
    assert trace.partitions[0] is None and trace.partitions[1] is not None
    assert trace.failures[0][0] == 0.25 and "DegenerateCluster" in trace.failures[0][1]
    assert math.isnan(trace.scores[0])
    assert trace.n_trimmed[0] == -1
    with pytest.raises(AllLevelsFailed):
        monitor_alpha(np.zeros((8, 2)), 2, grid=[0.1, 0.0], n_starts=2)


def test_restricted_ari_ignores_trimmed():
    a = Partition.from_labels([1, 1, 2, 2, 0, 0])
    b = Partition.from_labels([2, 2, 1, 1, 1, 2])
    assert restricted_ari(a, b) == 1.0


def test_level_stability_and_pick():
    assert level_stability([1.0, 0.5, 0.9]) == [1.0, 0.5, 0.5, 0.9]
    assert level_stability([float("nan"), 1.0]) == [-1.0, -1.0, 1.0]
    alphas = [0.4, 0.3, 0.2, 0.1, 0.0]
    # first top run 0.4..0.3, a later tie at 0.0 is not part of it
    assert pick_level(alphas, [1.0, 1.0, 0.7, 0.8, 1.0]) == 0.3
    assert pick_level(alphas, [0.2, 0.5, 0.5 - 1e-12, 0.5, 0.1]) == 0.1
    assert pick_level(alphas, [float("nan")] * 5) == 0.0
