"""Distribution-free conformal prediction sets from classifier score
matrices, with federated calibration simulated by averaging
per-institution conformity quantiles."""

from ._version import __version__
from .conformal import (
    APS,
    LAC,
    ConformityScores,
    PredictionSet,
    QuantileEstimate,
    aps_conformity_scores,
    aps_prediction_set,
    calibrate_quantile,
    class_entropy,
    conformity_scores,
    lac_conformity_scores,
    lac_prediction_set,
    naive_prediction_set,
    quantile_level,
    row_entropies,
)
from .errors import (
    ConformalError,
    EmptyCalibrationError,
    EmptyInputError,
    FederationEmptyError,
    InvalidRowError,
    InvalidSpecError,
    LabelOutOfRangeError,
    LengthMismatchError,
    MissingLabelsError,
    ParseError,
    SimplexViolationError,
    TooFewRowsError,
    ValidationError,
)
from .federation import (
    FederatedQuantile,
    FederationConfig,
    Institution,
    federated_quantile,
    inject_label_noise,
    local_quantile,
    partition_dataset,
)
from .harness import (
    ENTROPY_PERCENTILES,
    METHODS,
    EntropyCorrelation,
    EvaluationReport,
    ExperimentPlan,
    MethodAlphaResult,
    empirical_coverage,
    entropy_correlation,
    mean_cardinality,
    run_experiment,
)
from .io_formats import (
    FederationManifest,
    ManifestInstitution,
    load_manifest,
    manifest_to_plan,
    read_report,
    read_score_matrix,
    write_manifest,
    write_report,
    write_score_matrix,
)
from .matrix import SIMPLEX_ATOL, ScoreMatrix, check_alpha, check_row
from .synth import GeneratorSpec, generate, split_synthetic

__all__ = [
    "__version__",
    "APS",
    "LAC",
    "METHODS",
    "ENTROPY_PERCENTILES",
    "SIMPLEX_ATOL",
    "ConformalError",
    "ValidationError",
    "MissingLabelsError",
    "InvalidRowError",
    "EmptyCalibrationError",
    "TooFewRowsError",
    "FederationEmptyError",
    "LengthMismatchError",
    "EmptyInputError",
    "InvalidSpecError",
    "ParseError",
    "SimplexViolationError",
    "LabelOutOfRangeError",
    "ScoreMatrix",
    "check_alpha",
    "check_row",
    "ConformityScores",
    "QuantileEstimate",
    "PredictionSet",
    "aps_conformity_scores",
    "lac_conformity_scores",
    "conformity_scores",
    "quantile_level",
    "calibrate_quantile",
    "aps_prediction_set",
    "lac_prediction_set",
    "naive_prediction_set",
    "class_entropy",
    "row_entropies",
    "Institution",
    "FederationConfig",
    "FederatedQuantile",
    "partition_dataset",
    "inject_label_noise",
    "local_quantile",
    "federated_quantile",
    "GeneratorSpec",
    "generate",
    "split_synthetic",
    "ExperimentPlan",
    "EvaluationReport",
    "MethodAlphaResult",
    "EntropyCorrelation",
    "empirical_coverage",
    "mean_cardinality",
    "entropy_correlation",
    "run_experiment",
    "FederationManifest",
    "ManifestInstitution",
    "read_score_matrix",
    "write_score_matrix",
    "load_manifest",
    "write_manifest",
    "manifest_to_plan",
    "write_report",
    "read_report",
]
