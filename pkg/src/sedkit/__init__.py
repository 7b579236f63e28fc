"""Entropy-guided pseudo-label threshold search on a synthetic detection world.

The package adapts a detector to an unlabeled domain by promoting its own
confident predictions to training labels, where the confidence cutoff is
chosen by retraining across a descending grid and stopping at the first local
minimum of mean prediction self-entropy.  A built-in synthetic world and
surrogate SGD trainer make the whole loop measurable on a laptop, including
mosaic augmentation for manufacturing hard positives and the label-noise
analytics that motivate the entropy signal.
"""
from .boxes import (
    BoundingBox,
    Dataset,
    Detection,
    GroundTruth,
    ImageRecord,
    MatchResult,
    ProbVector,
    clip_box,
    iou,
    match_detections,
)
from .curves import format_csv, line_plot_svg, write_csv, write_svg
from .dataset_io import (
    atomic_write_text,
    load_dataset,
    load_mosaic_batch,
    load_pseudo_labels,
    load_world,
    save_dataset,
    save_mosaic_batch,
    save_pseudo_labels,
    save_world,
)
from .errors import SweepError, TrainingDivergedError, ValidationError
from .metrics import (
    ConfidenceHistogram,
    EntropyReport,
    MapReport,
    PrecisionRecallCurve,
    average_precision,
    confidence_histogram,
    detection_self_entropy,
    evaluate_map,
    mean_self_entropy,
    precision_recall_curve,
)
from .mosaic import (
    MosaicConfig,
    MosaicLabel,
    MosaicSample,
    TilePlacement,
    compose_mosaic,
    mosaic_batch,
    transform_label,
)
from .pseudo_labels import (
    PseudoLabel,
    PseudoLabelSet,
    generate_pseudo_labels,
    pseudo_label_stats,
)
from .seeding import derive_seed, make_rng
from .sweep import (
    DEFAULT_GRID,
    DEFAULT_PLATEAU_EPSILON,
    FIRST_LOCAL_MINIMUM,
    GLOBAL_MIN_FALLBACK,
    SweepPoint,
    SweepResult,
    Trainer,
    adapt,
    run_sweep,
    select_threshold,
)
from .world import (
    EMISSION_FLOOR,
    Candidate,
    SgdConfig,
    SurrogateModel,
    SurrogateTrainer,
    ToyPoint,
    TrainingResult,
    WorldConfig,
    WorldDataset,
    default_mosaic_config,
    generate_world,
    make_source_model,
    predict,
    toy_noise_experiment,
    train_surrogate,
)

__version__ = "0.1.0"

__all__ = [
    "BoundingBox",
    "Candidate",
    "ConfidenceHistogram",
    "Dataset",
    "DEFAULT_GRID",
    "DEFAULT_PLATEAU_EPSILON",
    "Detection",
    "EMISSION_FLOOR",
    "EntropyReport",
    "FIRST_LOCAL_MINIMUM",
    "GLOBAL_MIN_FALLBACK",
    "GroundTruth",
    "ImageRecord",
    "MapReport",
    "MatchResult",
    "MosaicConfig",
    "MosaicLabel",
    "MosaicSample",
    "PrecisionRecallCurve",
    "ProbVector",
    "PseudoLabel",
    "PseudoLabelSet",
    "SgdConfig",
    "SurrogateModel",
    "SurrogateTrainer",
    "SweepError",
    "SweepPoint",
    "SweepResult",
    "TilePlacement",
    "ToyPoint",
    "Trainer",
    "TrainingDivergedError",
    "TrainingResult",
    "ValidationError",
    "WorldConfig",
    "WorldDataset",
    "adapt",
    "atomic_write_text",
    "average_precision",
    "clip_box",
    "compose_mosaic",
    "confidence_histogram",
    "default_mosaic_config",
    "derive_seed",
    "detection_self_entropy",
    "evaluate_map",
    "format_csv",
    "generate_pseudo_labels",
    "generate_world",
    "iou",
    "line_plot_svg",
    "load_dataset",
    "load_mosaic_batch",
    "load_pseudo_labels",
    "load_world",
    "make_rng",
    "make_source_model",
    "match_detections",
    "mean_self_entropy",
    "mosaic_batch",
    "precision_recall_curve",
    "predict",
    "pseudo_label_stats",
    "run_sweep",
    "save_dataset",
    "save_mosaic_batch",
    "save_pseudo_labels",
    "save_world",
    "select_threshold",
    "toy_noise_experiment",
    "train_surrogate",
    "transform_label",
    "write_csv",
    "write_svg",
]
