"""Reproducibility benchmarks for vector retrieval."""

from ._core import (
    Index,
    ValidationError,
    VectorSet,
    agreement,
    distributed_search,
    drift_matrix,
    emit_plot_csv,
    fnv1a64,
    gen_synthetic,
    index_presets,
    jaccard,
    kendall_tau,
    merge_candidates,
    overlap_coefficient,
    quantize,
    quantize_value,
    rbo,
    read_embeddings,
    redact_metadata,
    scenario_cross_embedding,
    scenario_distributed,
    scenario_insertion,
    scenario_precision,
    scenario_stability,
    shard,
    unit_gaussian_matrix,
    write_embeddings,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
