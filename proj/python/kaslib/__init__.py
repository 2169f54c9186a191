"""Active subspaces and kernel-based active subspaces."""

from ._kaslib import (
    Dataset,
    FeatureMap,
    GpModel,
    Subspace,
    Surrogate,
    active_subspace,
    benchmark_names,
    compare,
    fit_surrogate,
    generate_dataset,
    gp_fit,
    grid_search,
    kernel_active_subspace,
    rrmse,
)

__all__ = [
    "Dataset",
    "FeatureMap",
    "GpModel",
    "Subspace",
    "Surrogate",
    "active_subspace",
    "benchmark_names",
    "compare",
    "fit_surrogate",
    "generate_dataset",
    "gp_fit",
    "grid_search",
    "kernel_active_subspace",
    "rrmse",
]
