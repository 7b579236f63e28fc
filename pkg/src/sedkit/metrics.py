"""Self-entropy, average precision, mAP, and confidence-interval accounting.

Self-entropy here is the category-count-normalized form
``-(1/n) * sum_c p_c * ln(p_c)`` over the full probability vector
(foreground categories plus background).  The dataset-level mean averages
per-image means, skipping images without detections.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .boxes import Dataset, Detection, match_detections
from .errors import ValidationError


@dataclass(frozen=True)
class EntropyReport:
    mean_self_entropy: float
    per_image: tuple[tuple[str, float], ...]
    skipped_empty_images: int


@dataclass(frozen=True)
class PrecisionRecallCurve:
    """(recall, precision) pairs ordered by descending confidence cutoff."""

    points: tuple[tuple[float, float], ...]


@dataclass(frozen=True)
class MapReport:
    per_category: dict[int, float]
    mean_ap: float


@dataclass(frozen=True)
class ConfidenceHistogram:
    """TP/FP mass per confidence bin, as fractions of the total ground truth.

    fn_ratio is the share of ground truths never matched by any detection,
    i.e. the objects missing even at confidence threshold zero.
    """

    bin_edges: tuple[float, ...]
    tp_ratio: tuple[float, ...]
    fp_ratio: tuple[float, ...]
    fn_ratio: float

    def __post_init__(self):
        total = math.fsum(self.tp_ratio) + self.fn_ratio
        if abs(total - 1.0) > 1e-9:
            raise ValidationError(f"tp mass plus fn mass is {total!r}, expected 1")


def detection_self_entropy(p) -> float:
    """Normalized self-entropy of one probability vector, in nats.

    0 * ln(0) is taken as 0, so one-hot vectors score exactly 0.
    """
    values = p.values if hasattr(p, "values") else tuple(p)
    acc = 0.0
    for v in values:
        if v > 0.0:
            acc += v * math.log(v)
    return -acc / len(values)


def mean_self_entropy(dataset: Dataset) -> EntropyReport:
    """Average per-image self-entropy over images that carry detections."""
    per_image = []
    skipped = 0
    for img in dataset.images:
        if not img.detections:
            skipped += 1
            continue
        entropies = [detection_self_entropy(det.probs) for det in img.detections]
        per_image.append((img.image_id, math.fsum(entropies) / len(entropies)))
    if not per_image:
        raise ValidationError("mean self-entropy undefined: no image has detections")
    mean = math.fsum(e for _, e in per_image) / len(per_image)
    return EntropyReport(
        mean_self_entropy=mean,
        per_image=tuple(per_image),
        skipped_empty_images=skipped,
    )


def precision_recall_curve(tp_flags, gt_count: int) -> PrecisionRecallCurve:
    if gt_count <= 0:
        raise ValidationError("gt_count must be positive")
    flags = np.asarray(tp_flags, dtype=bool)
    if flags.size == 0:
        return PrecisionRecallCurve(points=())
    tp_cum = np.cumsum(flags)
    ranks = np.arange(1, flags.size + 1)
    recall = tp_cum / gt_count
    precision = tp_cum / ranks
    return PrecisionRecallCurve(points=tuple(zip(recall.tolist(), precision.tolist())))


def average_precision(tp_flags, gt_count: int) -> float:
    """Area under the precision envelope of the recall curve.

    The envelope takes, at each recall level, the maximum precision achieved
    at that recall or beyond (continuous-area integration, not 11-point).
    """
    curve = precision_recall_curve(tp_flags, gt_count)
    if not curve.points:
        return 0.0
    recall = np.array([r for r, _ in curve.points])
    precision = np.array([p for _, p in curve.points])
    envelope = np.maximum.accumulate(precision[::-1])[::-1]
    prev_recall = np.concatenate(([0.0], recall[:-1]))
    return float(np.sum((recall - prev_recall) * envelope))


def _pooled_category_flags(dataset: Dataset, category: int, iou_threshold: float):
    """Match each image's detections of one category, pool, and rank globally.

    Returns the TP flags in descending-confidence order plus the category's
    ground-truth count.  Ties in confidence keep dataset order (stable sort),
    so results are reproducible.
    """
    scored: list[tuple[float, bool]] = []
    gt_count = 0
    for img in dataset.images:
        gts = [gt.box for gt in (img.ground_truth or ()) if gt.category == category]
        gt_count += len(gts)
        preds = sorted(
            (det for det in img.detections if det.category == category),
            key=lambda det: -det.confidence,
        )
        result = match_detections(preds, gts, iou_threshold)
        scored.extend((det.confidence, flag) for det, flag in zip(preds, result.tp_flags))
    scored.sort(key=lambda item: -item[0])
    return [flag for _, flag in scored], gt_count


def evaluate_map(dataset: Dataset, iou_threshold: float = 0.5) -> MapReport:
    """Per-category AP pooled across images; mAP over categories with ground truth."""
    if dataset.total_ground_truth() == 0:
        raise ValidationError("mAP undefined: dataset has no ground truth")
    per_category: dict[int, float] = {}
    for category in range(dataset.n_foreground):
        flags, gt_count = _pooled_category_flags(dataset, category, iou_threshold)
        if gt_count == 0:
            continue
        per_category[category] = average_precision(flags, gt_count)
    mean_ap = math.fsum(per_category.values()) / len(per_category)
    return MapReport(per_category=per_category, mean_ap=mean_ap)


def confidence_histogram(dataset: Dataset, bin_edges) -> ConfidenceHistogram:
    """Count TP/FP detections per confidence interval, relative to total GT.

    Matching runs once over the full detection set (IoU 0.5), so a ground
    truth matched by a low-confidence detection still counts as found; only
    ground truths no detection ever matches contribute to fn_ratio.
    Detections outside the edge range land in the nearest end bin.
    """
    edges = tuple(float(e) for e in bin_edges)
    if len(edges) < 2 or any(edges[i] >= edges[i + 1] for i in range(len(edges) - 1)):
        raise ValidationError("bin_edges must be strictly increasing with at least two entries")
    if edges[0] < 0.0 or edges[-1] > 1.0:
        raise ValidationError("bin_edges must lie within [0, 1]")
    total_gt = dataset.total_ground_truth()
    if total_gt == 0:
        raise ValidationError("confidence histogram undefined: dataset has no ground truth")

    n_bins = len(edges) - 1
    tp_counts = np.zeros(n_bins, dtype=np.int64)
    fp_counts = np.zeros(n_bins, dtype=np.int64)
    unmatched_gt = 0
    for img in dataset.images:
        gt_list = img.ground_truth or ()
        for category in range(dataset.n_foreground):
            gts = [gt.box for gt in gt_list if gt.category == category]
            preds = sorted(
                (det for det in img.detections if det.category == category),
                key=lambda det: -det.confidence,
            )
            result = match_detections(preds, gts, 0.5)
            unmatched_gt += result.unmatched_gt_count
            for det, flag in zip(preds, result.tp_flags):
                idx = int(np.searchsorted(edges, det.confidence, side="right")) - 1
                idx = min(max(idx, 0), n_bins - 1)
                if flag:
                    tp_counts[idx] += 1
                else:
                    fp_counts[idx] += 1
    return ConfidenceHistogram(
        bin_edges=edges,
        tp_ratio=tuple((tp_counts / total_gt).tolist()),
        fp_ratio=tuple((fp_counts / total_gt).tolist()),
        fn_ratio=unmatched_gt / total_gt,
    )
