"""Anomaly scoring for variable-size sets of image descriptors.

Models each image's set of local-feature descriptors as a draw from a
Poisson set process with a single Gaussian feature density, fits the
process from normal samples only, and scores test sets by a set-energy
statistic (alongside distance-sum and log-likelihood baselines).
"""

from .errors import (
    DataError,
    DegenerateInputWarning,
    DegenerateModelWarning,
    EstimationError,
    EvaluationError,
    FormatError,
    ModelError,
    RfsEnergyError,
    ScoringError,
    TruncationError,
    ValidationError,
)
from .estimation import (
    ModelParams,
    fit_empirical_covariance,
    fit_feature_mean,
    fit_model,
    fit_poisson_intensity,
    ledoit_wolf_shrink,
    load_model,
    save_model,
)
from .evaluation import (
    EvalReport,
    FewShotResult,
    ItemScore,
    RocPoint,
    auc,
    evaluate_category,
    few_shot_experiment,
    roc_curve,
    trapezoid_area,
    write_few_shot_csv,
    write_report_json,
    write_roc_csv,
)
from .ppf import (
    Manifest,
    ManifestItem,
    PointPatternSet,
    load_sets,
    read_manifest,
    read_ppf,
    write_manifest,
    write_ppf,
)
from .scoring import (
    ScoringConfig,
    mahalanobis_sq,
    rfs_energy,
    rfs_log_likelihood,
    score_as,
    score_batch,
    score_set,
)
from .synthetic import (
    SyntheticConfig,
    generate_dataset,
    item_stream,
    sample_anomalous_set,
    sample_normal_set,
)

__version__ = "0.1.0"

__all__ = [
    "DataError",
    "DegenerateInputWarning",
    "DegenerateModelWarning",
    "EstimationError",
    "EvalReport",
    "EvaluationError",
    "FewShotResult",
    "FormatError",
    "ItemScore",
    "Manifest",
    "ManifestItem",
    "ModelError",
    "ModelParams",
    "PointPatternSet",
    "RfsEnergyError",
    "RocPoint",
    "ScoringConfig",
    "ScoringError",
    "SyntheticConfig",
    "TruncationError",
    "ValidationError",
    "auc",
    "evaluate_category",
    "few_shot_experiment",
    "fit_empirical_covariance",
    "fit_feature_mean",
    "fit_model",
    "fit_poisson_intensity",
    "generate_dataset",
    "item_stream",
    "ledoit_wolf_shrink",
    "load_model",
    "load_sets",
    "mahalanobis_sq",
    "read_manifest",
    "read_ppf",
    "rfs_energy",
    "rfs_log_likelihood",
    "roc_curve",
    "sample_anomalous_set",
    "sample_normal_set",
    "save_model",
    "score_as",
    "score_batch",
    "score_set",
    "trapezoid_area",
    "write_few_shot_csv",
    "write_manifest",
    "write_ppf",
    "write_report_json",
    "write_roc_csv",
]
