"""Quarterly water-consumption forecasting and series clustering."""

from ._hydrocast import (
    AlignedGroup,
    ClusterParams,
    Clustering,
    Dataset,
    EvalReport,
    HydrocastError,
    Range,
    RecurrentModel,
    ReportRow,
    SarimaModel,
    SarimaOrder,
    Series,
    SynthConfig,
    TrainConfig,
    align_groups,
    baseline_forecast,
    benchmark,
    cluster,
    cosine_similarity,
    dbscan_vectors,
    default_order_grid,
    euclidean_distance,
    fit_sarima,
    generate_synthetic,
    kde,
    metrics,
    param_count,
    preset,
    run_cli,
    sarima_forecast,
    select_sarima,
    train,
)

PRESETS = ("D1", "D2", "D3", "D4")

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
