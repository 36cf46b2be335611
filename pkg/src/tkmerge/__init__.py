"""Robust clustering by trimming plus merging of inflated components.

Step one fits k > K components to the untrimmed part of the data (trimmed
k-means or TCLUST); step two merges the components hierarchically into K
groups.  Trimmed observations carry label 0 throughout.
"""

__version__ = "0.1.0"

from .agglomerate import centroid_dissimilarity, cut_tree, demp_dissimilarity, linkage_merge, merge_components
from .checks import strict
from .datagen import add_uniform_contamination, gen_gaussian_mixture, gen_shapes, scenario
from .metrics import ari, median, percentage_gain, sn_scale, summarize
from .model import ClusterModel, DataMatrix, Dendrogram, Dissimilarity, FitConfig, Partition
from .monitor import monitor_alpha
from .pipeline import default_k, fit, fit_tc_merge, fit_tk_merge
from .tclust import fit_tclust, restrict_eigenvalues
from .trimmed_kmeans import fit_kmeans, fit_tkmeans

__all__ = [
    "ClusterModel", "DataMatrix", "Dendrogram", "Dissimilarity", "FitConfig", "Partition",
    "add_uniform_contamination", "ari", "centroid_dissimilarity", "cut_tree", "default_k", "demp_dissimilarity",
    "fit", "fit_kmeans", "fit_tc_merge", "fit_tclust", "fit_tk_merge", "fit_tkmeans", "gen_gaussian_mixture",
    "gen_shapes", "linkage_merge", "median", "merge_components", "monitor_alpha", "percentage_gain",
    "restrict_eigenvalues", "scenario", "sn_scale", "strict", "summarize",
]
