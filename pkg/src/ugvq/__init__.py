"""Paired-comparison analysis and metadata-driven quality prediction for user-generated video."""

__version__ = "0.1.0"

from .cluster import ClusterPartition, RWRClustering, cluster_graph, modularity, relevance_matrix, sweep_restart
from .hodge import HodgeDecomposition, HodgeRank, global_scores, hodge_decompose, mos_ranking, total_inconsistency
from .metafeat import METRICS, MetadataFeaturizer, derive_metrics, ingest_metadata, rank_metrics_by_srocc
from .pairdata import ComparisonGraph, EdgeFlow, adjacency_matrix, ingest_comparisons, preference_matrix, winning_rate
from .regress import GaussianSVR, LinearRegressor, fit_linear, fit_svr, incremental_feature_eval, predict
from .stats import one_way_anova, rank_differences, srocc, srocc_significance
from .synth import SynthConfig, generate

__all__ = [
    "ClusterPartition", "ComparisonGraph", "EdgeFlow", "GaussianSVR", "HodgeDecomposition",
    "HodgeRank", "LinearRegressor", "METRICS", "MetadataFeaturizer", "RWRClustering",
    "SynthConfig", "adjacency_matrix", "cluster_graph", "derive_metrics", "fit_linear", "fit_svr",
    "generate", "global_scores", "hodge_decompose", "incremental_feature_eval", "ingest_comparisons",
    "ingest_metadata", "modularity", "mos_ranking", "one_way_anova", "predict", "preference_matrix",
    "rank_differences", "rank_metrics_by_srocc", "relevance_matrix", "srocc", "srocc_significance",
    "sweep_restart", "total_inconsistency", "winning_rate",
]
