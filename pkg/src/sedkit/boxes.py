"""Geometric and matching primitives for boxes, detections, and ground truth.

- BoundingBox / Detection / ImageRecord / Dataset: immutable value types
- iou: intersection over union of two boxes
- match_detections: one-to-one greedy matching of predictions to ground truth
- clip_box: intersect a box with an image canvas

Boxes use continuous corner coordinates (x_min, y_min, x_max, y_max).
Probability vectors list the foreground categories first and end with one
background entry.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import ValidationError

# slack for float dust introduced by clipping arithmetic
_COORD_EPS = 1e-9
_PROB_SUM_TOL = 1e-9


@dataclass(frozen=True)
class BoundingBox:
    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self):
        for name in ("x_min", "y_min", "x_max", "y_max"):
            if not math.isfinite(getattr(self, name)):
                raise ValidationError(f"box coordinate {name} is not finite")
            # canonical float storage keeps serialization repr-stable
            object.__setattr__(self, name, float(getattr(self, name)))
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ValidationError(
                f"degenerate box ({self.x_min}, {self.y_min}, {self.x_max}, {self.y_max})"
            )

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x_min, self.y_min, self.x_max, self.y_max)


@dataclass(frozen=True)
class ProbVector:
    """Per-category probabilities: foreground entries then one background entry."""

    values: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if len(self.values) < 2:
            raise ValidationError("probability vector needs at least one foreground and one background entry")
        if any(not math.isfinite(v) or v < 0.0 for v in self.values):
            raise ValidationError("probabilities must be finite and non-negative")
        total = math.fsum(self.values)
        if abs(total - 1.0) > _PROB_SUM_TOL:
            raise ValidationError(f"probabilities sum to {total!r}, expected 1 within {_PROB_SUM_TOL}")

    @property
    def n_categories(self) -> int:
        return len(self.values)

    @property
    def foreground(self) -> tuple[float, ...]:
        return self.values[:-1]

    @property
    def background(self) -> float:
        return self.values[-1]


@dataclass(frozen=True)
class Detection:
    box: BoundingBox
    probs: ProbVector
    confidence: float
    category: int

    def __post_init__(self):
        fg = self.probs.foreground
        if not 0 <= self.category < len(fg):
            raise ValidationError(f"category {self.category} does not index a foreground entry")
        top = max(fg)
        if self.confidence != top or fg[self.category] != top:
            raise ValidationError("confidence/category must be the max foreground probability and its index")

    @classmethod
    def from_probs(cls, box: BoundingBox, probs: ProbVector) -> "Detection":
        fg = probs.foreground
        category = max(range(len(fg)), key=fg.__getitem__)
        return cls(box=box, probs=probs, confidence=fg[category], category=category)


@dataclass(frozen=True)
class GroundTruth:
    box: BoundingBox
    category: int

    def __post_init__(self):
        if self.category < 0:
            raise ValidationError("ground-truth category must be non-negative")


@dataclass(frozen=True)
class ImageRecord:
    image_id: str
    width: float
    height: float
    detections: tuple[Detection, ...] = ()
    ground_truth: tuple[GroundTruth, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "detections", tuple(self.detections))
        if self.ground_truth is not None:
            object.__setattr__(self, "ground_truth", tuple(self.ground_truth))
        if not (self.width > 0 and self.height > 0):
            raise ValidationError(f"image {self.image_id!r}: degenerate canvas {self.width}x{self.height}")
        object.__setattr__(self, "width", float(self.width))
        object.__setattr__(self, "height", float(self.height))
        for box in self._all_boxes():
            if (box.x_min < -_COORD_EPS or box.y_min < -_COORD_EPS
                    or box.x_max > self.width + _COORD_EPS or box.y_max > self.height + _COORD_EPS):
                raise ValidationError(
                    f"image {self.image_id!r}: box {box.as_tuple} exceeds canvas "
                    f"[0,{self.width}]x[0,{self.height}]"
                )

    def _all_boxes(self):
        for det in self.detections:
            yield det.box
        for gt in self.ground_truth or ():
            yield gt.box


@dataclass(frozen=True)
class Dataset:
    images: tuple[ImageRecord, ...]
    category_names: tuple[str, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "images", tuple(self.images))
        object.__setattr__(self, "category_names", tuple(self.category_names))
        n_fg = len(self.category_names)
        seen: set[str] = set()
        for img in self.images:
            if img.image_id in seen:
                raise ValidationError(f"duplicate image id {img.image_id!r}")
            seen.add(img.image_id)
            for det in img.detections:
                if det.category >= n_fg:
                    raise ValidationError(f"image {img.image_id!r}: detection category {det.category} out of range")
                if det.probs.n_categories != n_fg + 1:
                    raise ValidationError(
                        f"image {img.image_id!r}: probability vector has {det.probs.n_categories} entries, "
                        f"expected {n_fg + 1}"
                    )
            for gt in img.ground_truth or ():
                if gt.category >= n_fg:
                    raise ValidationError(f"image {img.image_id!r}: ground-truth category {gt.category} out of range")

    @property
    def n_foreground(self) -> int:
        return len(self.category_names)

    def has_ground_truth(self) -> bool:
        return any(img.ground_truth is not None for img in self.images)

    def total_ground_truth(self) -> int:
        return sum(len(img.ground_truth or ()) for img in self.images)


def iou(a: BoundingBox, b: BoundingBox) -> float:
    """Intersection over union of two valid boxes; 0 when disjoint."""
    ix = max(0.0, min(a.x_max, b.x_max) - max(a.x_min, b.x_min))
    iy = max(0.0, min(a.y_max, b.y_max) - max(a.y_min, b.y_min))
    inter = ix * iy
    if inter == 0.0:
        return 0.0
    union = a.area + b.area - inter
    return inter / union


def clip_box(box: BoundingBox, width: float, height: float) -> BoundingBox | None:
    """Intersect a box with the canvas [0, width] x [0, height].

    Returns None when the intersection has zero area.
    """
    if not (width > 0 and height > 0):
        raise ValidationError(f"degenerate canvas {width}x{height}")
    x_min = max(box.x_min, 0.0)
    y_min = max(box.y_min, 0.0)
    x_max = min(box.x_max, width)
    y_max = min(box.y_max, height)
    if x_min >= x_max or y_min >= y_max:
        return None
    return BoundingBox(x_min, y_min, x_max, y_max)


@dataclass(frozen=True)
class MatchResult:
    """Per-prediction TP/FP outcome plus the count of ground truths left unmatched."""

    tp_flags: tuple[bool, ...]
    matched_gt: tuple[int | None, ...]
    unmatched_gt_count: int

    @property
    def tp_count(self) -> int:
        return sum(self.tp_flags)

    @property
    def fp_count(self) -> int:
        return len(self.tp_flags) - self.tp_count


def match_detections(
    preds: list[Detection] | tuple[Detection, ...],
    gts: list[BoundingBox] | tuple[BoundingBox, ...],
    iou_threshold: float = 0.5,
) -> MatchResult:
    """Greedily match confidence-sorted predictions to ground-truth boxes.

    Each prediction takes the unmatched ground truth of highest IoU, provided
    that IoU reaches the threshold; otherwise it is a false positive.  Every
    ground truth is matched at most once; those never matched are the false
    negatives.  Predictions must already be sorted by descending confidence.
    """
    if not 0.0 < iou_threshold < 1.0:
        raise ValidationError(f"iou_threshold must lie in (0,1), got {iou_threshold}")
    confidences = [p.confidence for p in preds]
    if any(confidences[i] < confidences[i + 1] for i in range(len(confidences) - 1)):
        raise ValidationError("predictions must be sorted by descending confidence")

    taken = [False] * len(gts)
    flags: list[bool] = []
    matched: list[int | None] = []
    for pred in preds:
        best_iou = 0.0
        best_idx = -1
        for gi, gt_box in enumerate(gts):
            if taken[gi]:
                continue
            overlap = iou(pred.box, gt_box)
            if overlap >= iou_threshold and overlap > best_iou:
                best_iou = overlap
                best_idx = gi
        if best_idx >= 0:
            taken[best_idx] = True
            flags.append(True)
            matched.append(best_idx)
        else:
            flags.append(False)
            matched.append(None)
    return MatchResult(
        tp_flags=tuple(flags),
        matched_gt=tuple(matched),
        unmatched_gt_count=taken.count(False),
    )
