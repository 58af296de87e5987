"""Inflation co-movement, centrality, robustness, sector correlation and
portfolio analytics.

Array functions take NumPy arrays with observations in rows and entities in
columns.
"""

from ._inflscope import (
    ConfigError,
    DataError,
    DomainError,
    Error,
    IngestError,
    NumericalError,
    centrality,
    cut_clusters,
    eigen_decompose,
    equity_robustness,
    hierarchical_cluster,
    load_csv,
    log_returns,
    operator_norm,
    optimal_offset,
    project_box_sum,
    rolling_correlation,
    rolling_slope,
    run_cli,
    similarity_count,
    solve_weights,
    trajectory_distance,
    wasserstein,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DataError",
    "DomainError",
    "Error",
    "IngestError",
    "NumericalError",
    "centrality",
    "cut_clusters",
    "eigen_decompose",
    "equity_robustness",
    "hierarchical_cluster",
    "load_csv",
    "log_returns",
    "operator_norm",
    "optimal_offset",
    "project_box_sum",
    "rolling_correlation",
    "rolling_slope",
    "run_cli",
    "similarity_count",
    "solve_weights",
    "trajectory_distance",
    "wasserstein",
]
