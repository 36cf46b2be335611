"""Seeded synthetic datasets: Gaussian mixtures, general shapes, uniform noise.

Every generator is a pure function of its arguments and seed.  Truth labels
use the package convention (0 = contaminant, 1..K = generating component).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, SeparationInfeasible
from .model import DataMatrix, Partition, seed_sequence

SHAPES = ("two_moons", "parabolic_band", "concentric_arcs", "four_blobs_bridged")
SCENARIOS = ("s1", "s2", "s3a", "s3b", "s3c")

# grids of the simulation study; scale shrinks sample sizes for desk runs
S1_SIZES = tuple(int(v) for v in np.linspace(1000, 45000, 10))
S1_SEPARATION = 1.5
S2_N = 5000
S2_SEPARATIONS = tuple(float(v) for v in np.linspace(2.0, 0.2, 10))
MIXTURE_HETEROGENEITY = 25.0
CONTAMINATION_EXPANSION = 1.2
# wider noise box for the Gaussian scenarios: plain k-means gets dragged by the
# noise while the clusters themselves stay mostly noise-free
MIXTURE_CONTAMINATION_EXPANSION = 2.0
SHAPE_NOISE_SD = {"two_moons": 0.1, "parabolic_band": 0.05, "concentric_arcs": 0.06, "four_blobs_bridged": 0.25}


@dataclass(frozen=True)
class SyntheticDataset:
    data: DataMatrix
    truth: Partition
    scenario_tag: str
    params_echo: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.data.n

    @property
    def n_contaminants(self) -> int:
        return self.truth.n_trimmed


def _rng(seed, *tag):
    return np.random.default_rng(seed_sequence(seed, *tag))


def _sizes(n_per_cluster, K):
    if np.ndim(n_per_cluster) == 0:
        return [int(n_per_cluster)] * K
    sizes = [int(v) for v in n_per_cluster]
    if len(sizes) != K:
        raise InputError("need one cluster size per component")
    return sizes


def _random_rotation(rng, p):
    q, r = np.linalg.qr(rng.standard_normal((p, p)))
    return q * np.sign(np.diag(r))


def gen_gaussian_mixture(K: int, n_per_cluster, p: int = 2, separation: float = 1.0,
                         heterogeneity: float = MIXTURE_HETEROGENEITY, seed: int = 0,
                         max_attempts: int = 1000) -> SyntheticDataset:
    """Heterogeneous, non-spherical Gaussian clusters with controlled separation.

    Means are drawn uniformly in [0, 10]^p (rejecting configurations whose
    closest pair is nearer than 2.5 / K^(1/p)).
    Each covariance is a random rotation of diagonal eigenvalues spanning
    [1, heterogeneity] (the two extremes plus, for p > 2, uniform draws in
    between); all covariances are then multiplied by a common factor
    so that the closest pair of means is exactly
    ``separation * (s1 + s2)``, s1 and s2 being the two largest component
    standard deviations (square roots of largest eigenvalues).  For a fixed
    seed, a smaller separation therefore only inflates the clusters.
    """
    if K < 1 or p < 1:
        raise InputError("K and p must be positive")
    if not separation > 0:
        raise InputError("separation must be positive")
    if heterogeneity < 1:
        raise InputError("heterogeneity must be >= 1")
    sizes = _sizes(n_per_cluster, K)
    rng = _rng(seed, 1)
    min_gap = 10.0 / (4.0 * K ** (1.0 / p))
    for _ in range(max_attempts):
        means = rng.uniform(0.0, 10.0, size=(K, p))
        if K == 1:
            break
        gaps = np.sqrt(((means[:, None] - means[None]) ** 2).sum(-1))[np.triu_indices(K, 1)]
        if gaps.min() >= min_gap:
            break
    else:
        raise SeparationInfeasible(f"could not place {K} means in [0,10]^{p} after {max_attempts} attempts")
    shapes = []
    for _ in range(K):
        eig = np.concatenate([[1.0, heterogeneity], rng.uniform(1.0, heterogeneity, size=p - 2)])[:p]
        eig = rng.permutation(eig)
        rot = _random_rotation(rng, p)
        shapes.append((rot * eig) @ rot.T)
    shapes = np.array(shapes)
    top_sd = np.sort(np.sqrt(np.linalg.eigvalsh(shapes).max(axis=1)))[::-1]
    if K > 1:
        closest = gaps.min()
        scale = closest / (separation * (top_sd[0] + top_sd[1]))
    else:
        scale = 1.0 / top_sd[0]
    covs = shapes * scale**2
    parts, truth = [], []
    for j in range(K):
        chol = np.linalg.cholesky(covs[j])
        z = rng.standard_normal((sizes[j], p))
        parts.append(means[j] + z @ chol.T)
        truth.append(np.full(sizes[j], j + 1))
    x = np.vstack(parts)
    lab = np.concatenate(truth)
    return SyntheticDataset(
        DataMatrix(x), Partition(lab, K), "gaussian_mixture",
        {"K": K, "p": p, "sizes": sizes, "separation": separation, "heterogeneity": heterogeneity,
         "seed": int(seed), "means": means.tolist(), "covariances": covs.tolist()},
    )


def add_uniform_contamination(ds: SyntheticDataset, rate: float, expansion: float = CONTAMINATION_EXPANSION,
                              seed: int = 0) -> SyntheticDataset:
    """Append round(rate * n) points uniform on the data bounding box.

    The box is centred on the data and each side is ``expansion`` times the
    data range.  Appended points are labelled 0.
    """
    if not 0.0 <= rate <= 0.5:
        raise InputError(f"contamination rate must lie in [0, 0.5], got {rate}")
    n = ds.n
    m = int(round(rate * n))
    if m == 0:
        return ds
    x = ds.data.values
    lo, hi = x.min(axis=0), x.max(axis=0)
    centre, half = (lo + hi) / 2, (hi - lo) / 2 * expansion
    rng = _rng(seed, 2)
    noise = rng.uniform(centre - half, centre + half, size=(m, x.shape[1]))
    echo = dict(ds.params_echo, contamination_rate=rate, contaminants=m, expansion=expansion,
                contamination_box=[(centre - half).tolist(), (centre + half).tolist()])
    return SyntheticDataset(
        DataMatrix(np.vstack([x, noise])),
        Partition(np.concatenate([ds.truth.labels, np.zeros(m, dtype=np.int64)]), ds.truth.k_groups),
        ds.scenario_tag, echo,
    )


def _moons(rng, n):
    t1 = rng.uniform(0, math.pi, n)
    t2 = rng.uniform(0, math.pi, n)
    a = np.column_stack([np.cos(t1), np.sin(t1)])
    b = np.column_stack([1 - np.cos(t2), 0.5 - np.sin(t2)])
    return [a, b]


def _parabola(rng, n):
    x = rng.uniform(-1, 1, n)
    return [np.column_stack([x, 0.8 * x**2])]


def _arcs(rng, n):
    out = []
    for radius in (1.0, 1.5, 2.0):
        t = rng.uniform(0.25 * math.pi, 1.75 * math.pi, n)
        out.append(radius * np.column_stack([np.cos(t), np.sin(t)]))
    return out


def _bridged(rng, n):
    corners = np.array([[0.0, 0.0], [6.0, 0.0], [6.0, 6.0], [0.0, 6.0]])
    out = []
    n_arm = n // 4
    for j in range(4):
        blob = corners[j] + rng.standard_normal((n - n_arm, 2)) * 0.6
        towards = corners[(j + 1) % 4] - corners[j]
        arm = corners[j] + rng.uniform(0.15, 0.4, n_arm)[:, None] * towards
        out.append(np.vstack([blob, arm]))
    return out


_SHAPE_SAMPLERS = {"two_moons": _moons, "parabolic_band": _parabola, "concentric_arcs": _arcs,
                   "four_blobs_bridged": _bridged}


def gen_shapes(shape: str, n_per_cluster: int, noise_sd: float | None = None, seed: int = 0) -> SyntheticDataset:
    """General-shaped clusters: points on parametric curves plus isotropic jitter.

    ``two_moons`` (K=2, unit half circles), ``parabolic_band`` (K=1, a thin
    band around y = 0.8 x^2), ``concentric_arcs`` (K=3 arcs of radius 1, 1.5
    and 2 over three quarters of a turn) and ``four_blobs_bridged`` (K=4
    round blobs, each with a straight arm reaching towards the next one).
    """
    if shape not in _SHAPE_SAMPLERS:
        raise InputError(f"unknown shape {shape!r}; choose from {SHAPES}")
    if n_per_cluster < 50:
        raise InputError("n_per_cluster must be at least 50")
    sd = SHAPE_NOISE_SD[shape] if noise_sd is None else float(noise_sd)
    rng = _rng(seed, 3)
    clean = _SHAPE_SAMPLERS[shape](rng, int(n_per_cluster))
    jitter = rng.standard_normal((sum(len(c) for c in clean), 2)) * sd
    x = np.vstack(clean) + jitter
    lab = np.concatenate([np.full(len(c), j + 1) for j, c in enumerate(clean)])
    return SyntheticDataset(DataMatrix(x), Partition(lab, len(clean)), shape,
                            {"shape": shape, "n_per_cluster": int(n_per_cluster), "noise_sd": sd,
                             "seed": int(seed), "K": len(clean)})


def shape_trimming_level(n: int, m: int) -> float:
    """Trimming used with general shapes: m/(n+m) - m/(10(n+m))."""
    return m / (n + m) - m / (10 * (n + m))


def scenario(scenario_id: str, scale: float = 1.0, seed: int = 0, level: int = 0,
             n: int | None = None) -> SyntheticDataset:
    """Compose the generators with the simulation-study parameters.

    ``level`` indexes the scenario grid: sample size for s1 (1000..45000),
    separation for s2 (decreasing, i.e. increasing overlap).  ``scale``
    shrinks cluster sizes.  ``n`` overrides the clean sample size (s1, s2)
    or the per-cluster size (s3*) before scaling.  ``params_echo['alpha']`` carries the trimming
    level the methods should use, ``params_echo['K']`` the number of groups.
    """
    if scenario_id not in SCENARIOS:
        raise InputError(f"unknown scenario {scenario_id!r}; choose from {SCENARIOS}")
    if not 0 < scale <= 1:
        raise InputError("scale must lie in (0, 1]")
    if scenario_id in ("s1", "s2"):
        grid = S1_SIZES if scenario_id == "s1" else S2_SEPARATIONS
        if not 0 <= level < len(grid):
            raise InputError(f"level must lie in 0..{len(grid) - 1}")
        base = n if n is not None else (grid[level] if scenario_id == "s1" else S2_N)
        n = int(round(base * scale))
        sep = S1_SEPARATION if scenario_id == "s1" else grid[level]
        K = 3
        sizes = [n // K + (1 if j < n % K else 0) for j in range(K)]
        ds = gen_gaussian_mixture(K, sizes, 2, sep, MIXTURE_HETEROGENEITY, seed)
        ds = add_uniform_contamination(ds, 0.2, MIXTURE_CONTAMINATION_EXPANSION, seed)
        m = ds.n_contaminants
        alpha = m / (n + m)
    else:
        shape, K, n_j = {"s3a": ("two_moons", 2, 1000), "s3b": ("concentric_arcs", 3, 3000),
                         "s3c": ("four_blobs_bridged", 4, 5000)}[scenario_id]
        n_j = max(50, int(round((n if n is not None else n_j) * scale)))
        ds = gen_shapes(shape, n_j, None, seed)
        n = ds.n
        ds = add_uniform_contamination(ds, 0.05, CONTAMINATION_EXPANSION, seed)
        m = ds.n_contaminants
        alpha = shape_trimming_level(n, m)
    echo = dict(ds.params_echo, scenario=scenario_id, scale=scale, level=level, K=K, alpha=alpha,
                n_clean=n, seed=int(seed))
    return SyntheticDataset(ds.data, ds.truth, scenario_id, echo)
