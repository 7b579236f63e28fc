"""Confidence-threshold search by self-entropy descent.

The sweep walks a descending grid of confidence thresholds.  At each one it
promotes detections to pseudo-labels, retrains a model from its original
weights (never from the previous point's weights, so points are independent),
re-predicts, and records the mean self-entropy of the re-prediction.  The
selected threshold is the first interior local minimum of that curve in sweep
order; when the curve is monotone within the grid, the global minimum serves
as fallback.

Ground-truth mAP is recorded per point when ground truth is present, but it
is strictly diagnostic: selection never looks at it, since the whole point of
the method is to pick a threshold without target labels.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Protocol, Sequence

from .boxes import Dataset
from .errors import SweepError, ValidationError
from .metrics import evaluate_map, mean_self_entropy
from .pseudo_labels import PseudoLabelSet, generate_pseudo_labels
from .seeding import derive_seed

FIRST_LOCAL_MINIMUM = "first-local-minimum"
GLOBAL_MIN_FALLBACK = "global-min-fallback"

DEFAULT_GRID = tuple(round(0.9 - 0.1 * i, 10) for i in range(9))
DEFAULT_PLATEAU_EPSILON = 1e-6


class Trainer(Protocol):
    """Contract the sweep needs from a trainable model family.

    ``train`` must be deterministic given (dataset, labels, seed) and must
    start from the same base weights on every call; ``predict`` must leave
    the dataset's ground truth untouched.
    """

    def train(self, dataset: Dataset, labels: PseudoLabelSet, seed: int) -> Any: ...

    def predict(self, model: Any, dataset: Dataset) -> Dataset: ...


@dataclass(frozen=True)
class SweepPoint:
    threshold: float
    mean_self_entropy: float
    positives_count: int
    mean_ap: float | None
    seed: int

    def __post_init__(self):
        if not math.isfinite(self.mean_self_entropy) or self.mean_self_entropy < 0.0:
            raise ValidationError(
                f"mean self-entropy must be finite and non-negative, got {self.mean_self_entropy!r}"
            )


@dataclass(frozen=True)
class SweepResult:
    points: tuple[SweepPoint, ...]
    selected_threshold: float
    selection_kind: str
    selected_index: int

    @property
    def selected_point(self) -> SweepPoint:
        return self.points[self.selected_index]


def _validate_grid(grid: Sequence[float]) -> tuple[float, ...]:
    thresholds = tuple(float(h) for h in grid)
    if not thresholds:
        raise ValidationError("threshold grid is empty")
    for h in thresholds:
        if not 0.0 <= h < 1.0:
            raise ValidationError(f"grid threshold {h!r} outside [0, 1)")
    if any(a <= b for a, b in zip(thresholds, thresholds[1:])):
        raise ValidationError("threshold grid must be strictly descending")
    return thresholds


def run_sweep(
    dataset: Dataset,
    trainer: Trainer,
    grid: Sequence[float] = DEFAULT_GRID,
    seed: int = 0,
) -> tuple[SweepPoint, ...]:
    """One retrain-and-measure pass per grid threshold, high to low.

    Each point gets its own derived seed, so the sweep is reproducible and
    points could run concurrently.  Any failure inside a point (training,
    prediction, or an empty re-prediction) aborts the sweep with the
    offending threshold in the error.
    """
    thresholds = _validate_grid(grid)
    has_gt = dataset.total_ground_truth() > 0
    points = []
    for i, threshold in enumerate(thresholds):
        labels = generate_pseudo_labels(dataset, threshold)
        point_seed = derive_seed(seed, i)
        try:
            model = trainer.train(dataset, labels, point_seed)
            predictions = trainer.predict(model, dataset)
            entropy = mean_self_entropy(predictions).mean_self_entropy
        except Exception as exc:  # noqa: BLE001 — the threshold is the useful context
            raise SweepError(threshold, str(exc)) from exc
        mean_ap = evaluate_map(predictions).mean_ap if has_gt else None
        points.append(
            SweepPoint(
                threshold=threshold,
                mean_self_entropy=entropy,
                positives_count=len(labels),
                mean_ap=mean_ap,
                seed=point_seed,
            )
        )
    return tuple(points)


def select_threshold(
    points: Sequence[SweepPoint],
    plateau_epsilon: float = DEFAULT_PLATEAU_EPSILON,
) -> tuple[float, str, int]:
    """Pick the first interior local minimum of the entropy curve.

    Scanning in sweep order, index ``i`` qualifies when the entropy dropped
    by more than ``plateau_epsilon`` from its predecessor and does not drop
    by more than ``plateau_epsilon`` to its successor.  A curve with no such
    interior point (monotone within the grid, or a single point) falls back
    to the global minimum.

    Returns (threshold, selection_kind, index).
    """
    if not points:
        raise ValidationError("cannot select a threshold from zero sweep points")
    if plateau_epsilon < 0.0:
        raise ValidationError(f"plateau_epsilon must be non-negative, got {plateau_epsilon!r}")
    entropies = [p.mean_self_entropy for p in points]
    for i in range(1, len(entropies) - 1):
        descended = entropies[i] < entropies[i - 1] - plateau_epsilon
        at_rest = entropies[i] <= entropies[i + 1] + plateau_epsilon
        if descended and at_rest:
            return points[i].threshold, FIRST_LOCAL_MINIMUM, i
    best = min(range(len(entropies)), key=lambda i: entropies[i])
    return points[best].threshold, GLOBAL_MIN_FALLBACK, best


def adapt(
    dataset: Dataset,
    trainer: Trainer,
    grid: Sequence[float] = DEFAULT_GRID,
    seed: int = 0,
    plateau_epsilon: float = DEFAULT_PLATEAU_EPSILON,
) -> tuple[Any, SweepResult]:
    """Full pipeline: sweep, select, and retrain once at the chosen threshold.

    The final training run reuses the selected point's derived seed, so the
    returned model is exactly the model that produced the selected entropy
    measurement.
    """
    points = run_sweep(dataset, trainer, grid, seed)
    selected_threshold, kind, index = select_threshold(points, plateau_epsilon)
    result = SweepResult(
        points=points,
        selected_threshold=selected_threshold,
        selection_kind=kind,
        selected_index=index,
    )
    labels = generate_pseudo_labels(dataset, selected_threshold)
    model = trainer.train(dataset, labels, points[index].seed)
    return model, result
