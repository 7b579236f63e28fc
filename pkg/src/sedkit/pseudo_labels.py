"""Pseudo-label generation by confidence thresholding.

A detection becomes a pseudo-label when its maximum foreground probability
is strictly above the threshold.  Everything else is treated as background
by omission — there is no explicit negative label.  Boxes pass through
unmodified, so label sets taken at two thresholds are nested: raising the
threshold can only remove labels, never alter or add them.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from .boxes import BoundingBox, Dataset
from .errors import ValidationError


@dataclass(frozen=True)
class PseudoLabel:
    image_id: str
    box: BoundingBox
    category: int
    confidence: float

    def __post_init__(self):
        object.__setattr__(self, "confidence", float(self.confidence))


@dataclass(frozen=True)
class PseudoLabelSet:
    threshold: float
    labels: tuple[PseudoLabel, ...]
    image_ids: tuple[str, ...]
    _by_image: dict[str, tuple[PseudoLabel, ...]] = field(repr=False, compare=False, default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "threshold", float(self.threshold))
        grouped: dict[str, list[PseudoLabel]] = {img_id: [] for img_id in self.image_ids}
        for label in self.labels:
            if label.image_id not in grouped:
                raise ValidationError(f"label references unknown image {label.image_id!r}")
            grouped[label.image_id].append(label)
        object.__setattr__(self, "_by_image", {k: tuple(v) for k, v in grouped.items()})

    def by_image(self, image_id: str) -> tuple[PseudoLabel, ...]:
        if image_id not in self._by_image:
            raise ValidationError(f"unknown image {image_id!r}")
        return self._by_image[image_id]

    def category_counts(self) -> dict[int, int]:
        return dict(Counter(label.category for label in self.labels))

    def __len__(self) -> int:
        return len(self.labels)


def generate_pseudo_labels(dataset: Dataset, threshold: float) -> PseudoLabelSet:
    """Keep detections whose max foreground probability exceeds ``threshold``.

    The comparison is strict, so a detection sitting exactly at the
    threshold is dropped.
    """
    if not 0.0 <= threshold < 1.0:
        raise ValidationError(f"threshold must lie in [0, 1), got {threshold!r}")
    labels = []
    for img in dataset.images:
        for det in img.detections:
            if det.confidence > threshold:
                labels.append(
                    PseudoLabel(
                        image_id=img.image_id,
                        box=det.box,
                        category=det.category,
                        confidence=det.confidence,
                    )
                )
    return PseudoLabelSet(
        threshold=threshold,
        labels=tuple(labels),
        image_ids=tuple(img.image_id for img in dataset.images),
    )


def pseudo_label_stats(label_set: PseudoLabelSet) -> dict[str, float]:
    """Headline numbers for a label set: counts, coverage, confidence spread."""
    n_images = len(label_set.image_ids)
    labeled_images = sum(1 for img_id in label_set.image_ids if label_set.by_image(img_id))
    confidences = [label.confidence for label in label_set.labels]
    return {
        "threshold": label_set.threshold,
        "n_labels": float(len(label_set.labels)),
        "n_images": float(n_images),
        "labeled_image_fraction": labeled_images / n_images if n_images else 0.0,
        "mean_confidence": sum(confidences) / len(confidences) if confidences else 0.0,
        "min_confidence": min(confidences) if confidences else 0.0,
    }
