from .desk import build_desk_dataset, desk_backends, desk_profile, verify_desk_dataset
from .evaluate import (
    ABLATION_ROWS,
    AblationTable,
    CategoryResult,
    EvalReport,
    evaluate_category,
    evaluate_dataset,
    profile_hash,
    run_ablations,
)
from .manifest import (
    DatasetManifest,
    ManifestEntry,
    build_mvtec_style_manifest,
    build_visa_style_manifest,
    load_manifest,
)
from .metrics import THRESHOLD_CAP, candidate_thresholds, f1_at_threshold, max_f1_pixel

__all__ = [
    "ABLATION_ROWS",
    "THRESHOLD_CAP",
    "AblationTable",
    "CategoryResult",
    "DatasetManifest",
    "EvalReport",
    "ManifestEntry",
    "build_desk_dataset",
    "build_mvtec_style_manifest",
    "build_visa_style_manifest",
    "candidate_thresholds",
    "desk_backends",
    "desk_profile",
    "evaluate_category",
    "evaluate_dataset",
    "f1_at_threshold",
    "load_manifest",
    "max_f1_pixel",
    "profile_hash",
    "run_ablations",
    "verify_desk_dataset",
]
