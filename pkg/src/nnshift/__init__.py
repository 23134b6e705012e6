"""Nearest-neighbor mean shift clustering with LSH buckets and epsilon-proximity labeling."""

__version__ = "0.1.0"

from .ascent import AscentParams, AscentResult, mean_shift_step, nnga_exact, nnga_plus
from .baselines import DbscanParams, KMeansParams, dbscan, kmeans, kmeans_fit
from .core import (DataError, Dataset, InvariantError, NormStats, euclidean_distance,
                   min_max_normalize)
from .knn import NeighborList, exact_knn
from .labeling import (Clustering, ClusterGraph, EpsParams, eps_proximity_partitioned,
                       estimate_epsilon, local_eps_proximity, merge_bucket_clusters,
                       partitioned_labeling, prototype_labeling)
from .lsh import (BucketIndex, ProjectionHasher, approx_knn, build_hasher, build_index,
                  hash_point, knn_recall, reservoir)
from .metrics import contingency, nmi, rand_index
from .pipeline import ConfigError, PipelineConfig, RunReport, run_pipeline

__all__ = [
    "AscentParams", "AscentResult", "BucketIndex", "Clustering", "ClusterGraph", "ConfigError",
    "DataError", "Dataset", "DbscanParams", "EpsParams", "InvariantError", "KMeansParams",
    "NeighborList", "NormStats", "PipelineConfig", "ProjectionHasher", "RunReport",
    "approx_knn", "build_hasher", "build_index", "contingency", "dbscan",
    "eps_proximity_partitioned", "estimate_epsilon", "euclidean_distance", "exact_knn",
    "hash_point", "kmeans", "kmeans_fit", "knn_recall", "local_eps_proximity",
    "mean_shift_step", "merge_bucket_clusters", "min_max_normalize", "nmi", "nnga_exact",
    "nnga_plus", "partitioned_labeling", "prototype_labeling", "rand_index", "reservoir",
    "run_pipeline",
]
