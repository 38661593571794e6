"""Two-way-clustering predictor thinning and ridge classification.

The package targets wide tabular problems (far more predictor columns than
samples) with a binary response.  An unsupervised two-way clustering loop
thins the predictor pool, a ridge model with a searched ridge constant does
the classification, and leave-one-out evaluation comes in an honest variant
(selection redone inside every fold) and the naive shortcut it exists to
expose.
"""

from .cluster import Clustering, KMeansConfig, kmeans, nearest_centroid
from .crossval import (
    AccessAudit,
    CVMode,
    CVReport,
    FoldPrediction,
    SynthConfig,
    generate_synthetic,
    holdout_validation,
    metrics,
    naive_loo_cv,
    proper_loo_cv,
    round_half_up,
)
from .dataset import (
    ALL_CLASSES,
    CLASS_ORDER,
    Dataset,
    DatasetError,
    PredictorClass,
    ValidationReport,
    load_dataset,
    save_dataset,
    subset_by_class,
    take_columns,
    take_rows,
    validate,
)
from .itc import (
    HeterogeneousPair,
    ITCConfig,
    ITCResult,
    IterationRecord,
    PairStat,
    SampleCell,
    Termination,
    cluster_samples_per_group,
    combine_cells,
    heterogeneous_pairs,
    occ_ratio,
    pair_loo_error,
    run_itc,
    sort_and_reduce,
)
from .pipeline import FittedPipeline, PipelineSpec, Thinning, fit_pipeline
from .preprocess import (
    NormalizedMatrix,
    StandardizationParams,
    constant_cosine_filter,
    log_shift_transform,
    normalize_predictors,
    standardize,
    zero_variance_columns,
)
from .ridge import (
    Criterion,
    RidgeFit,
    RidgeSearchConfig,
    T_SIGNIFICANCE,
    default_k_grid,
    gcv,
    predict_class,
    press,
    ridge_fit,
    select_k,
    t_ratios,
)
from .seeding import rng_for, seed_sequence, subseed

__version__ = "0.1.0"

__all__ = [
    "ALL_CLASSES",
    "AccessAudit",
    "CLASS_ORDER",
    "CVMode",
    "CVReport",
    "Clustering",
    "Criterion",
    "Dataset",
    "DatasetError",
    "FittedPipeline",
    "FoldPrediction",
    "HeterogeneousPair",
    "ITCConfig",
    "ITCResult",
    "IterationRecord",
    "KMeansConfig",
    "NormalizedMatrix",
    "PairStat",
    "PipelineSpec",
    "PredictorClass",
    "RidgeFit",
    "RidgeSearchConfig",
    "SampleCell",
    "StandardizationParams",
    "SynthConfig",
    "T_SIGNIFICANCE",
    "Termination",
    "Thinning",
    "ValidationReport",
    "cluster_samples_per_group",
    "combine_cells",
    "constant_cosine_filter",
    "default_k_grid",
    "fit_pipeline",
    "gcv",
    "generate_synthetic",
    "heterogeneous_pairs",
    "holdout_validation",
    "kmeans",
    "load_dataset",
    "log_shift_transform",
    "metrics",
    "naive_loo_cv",
    "nearest_centroid",
    "normalize_predictors",
    "occ_ratio",
    "pair_loo_error",
    "predict_class",
    "press",
    "proper_loo_cv",
    "ridge_fit",
    "rng_for",
    "round_half_up",
    "run_itc",
    "save_dataset",
    "seed_sequence",
    "select_k",
    "sort_and_reduce",
    "standardize",
    "subset_by_class",
    "subseed",
    "t_ratios",
    "take_columns",
    "take_rows",
    "validate",
    "zero_variance_columns",
]
