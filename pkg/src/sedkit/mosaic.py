"""Four-image mosaic composition with exact label geometry.

A mosaic places four labeled images on one canvas: a cut point splits the
canvas into quadrants, each source image is scaled and anchored so that its
corner nearest the cut point lands exactly on it, and everything outside a
tile's quadrant is cropped away.  Labels ride along — scale, translate, clip —
and a label survives only when enough of it stays visible.  The point of the
exercise is to manufacture small and partially occluded positives from easy
ones.

The pipeline works purely on box geometry.  ``MosaicSample.raster_partition``
exists so tests can check the geometry against a brute-force pixel oracle;
nothing else consumes rasters.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .boxes import BoundingBox, ImageRecord
from .errors import ValidationError
from .seeding import derive_seed, make_rng

QUADRANTS = ("top-left", "top-right", "bottom-left", "bottom-right")

_EPS = 1e-9


@dataclass(frozen=True)
class MosaicConfig:
    canvas_width: float
    canvas_height: float
    cut_range: tuple[float, float] = (0.3, 0.7)
    scale_range: tuple[float, float] = (0.5, 1.5)
    min_visible_area_ratio: float = 0.25
    seed: int = 0

    def __post_init__(self):
        if self.canvas_width <= 0 or self.canvas_height <= 0:
            raise ValidationError("mosaic canvas must have positive size")
        lo, hi = self.cut_range
        if not (0.0 < lo <= hi < 1.0):
            raise ValidationError(f"cut_range must satisfy 0 < lo <= hi < 1, got {self.cut_range!r}")
        slo, shi = self.scale_range
        if not (0.0 < slo <= shi) or not np.isfinite([slo, shi]).all():
            raise ValidationError(f"scale_range must satisfy 0 < lo <= hi, got {self.scale_range!r}")
        if not 0.0 < self.min_visible_area_ratio <= 1.0:
            raise ValidationError(
                f"min_visible_area_ratio must lie in (0, 1], got {self.min_visible_area_ratio!r}"
            )


@dataclass(frozen=True)
class TilePlacement:
    source_image_id: str
    quadrant: str
    scale: float
    offset: tuple[float, float]
    crop_window: BoundingBox

    def __post_init__(self):
        object.__setattr__(self, "scale", float(self.scale))
        object.__setattr__(self, "offset", (float(self.offset[0]), float(self.offset[1])))


@dataclass(frozen=True)
class MosaicLabel:
    box: BoundingBox
    category: int
    source_image_id: str
    source_label_index: int
    tile_index: int


@dataclass(frozen=True)
class MosaicSample:
    canvas_width: float
    canvas_height: float
    cut_point: tuple[float, float]
    tiles: tuple[TilePlacement, ...]
    labels: tuple[MosaicLabel, ...]

    def __post_init__(self):
        object.__setattr__(self, "canvas_width", float(self.canvas_width))
        object.__setattr__(self, "canvas_height", float(self.canvas_height))
        object.__setattr__(self, "cut_point", (float(self.cut_point[0]), float(self.cut_point[1])))
        if len(self.tiles) != 4:
            raise ValidationError(f"a mosaic has exactly 4 tiles, got {len(self.tiles)}")
        xs, ys = self.cut_point
        w, h = self.canvas_width, self.canvas_height
        expected = (
            (0.0, 0.0, xs, ys),
            (xs, 0.0, w, ys),
            (0.0, ys, xs, h),
            (xs, ys, w, h),
        )
        for tile, want, name in zip(self.tiles, expected, QUADRANTS):
            if tile.quadrant != name or tile.crop_window.as_tuple != want:
                raise ValidationError(f"{name} crop window {tile.crop_window.as_tuple} != {want}")
        for label in self.labels:
            b = label.box
            if b.x_min < -_EPS or b.y_min < -_EPS or b.x_max > w + _EPS or b.y_max > h + _EPS:
                raise ValidationError(f"label box {b.as_tuple} escapes the canvas")

    def raster_partition(self, pixels_per_unit: int = 1) -> np.ndarray:
        """Integer grid assigning each pixel center to its tile (0..3)."""
        if pixels_per_unit < 1:
            raise ValidationError("pixels_per_unit must be >= 1")
        n_rows = int(round(self.canvas_height * pixels_per_unit))
        n_cols = int(round(self.canvas_width * pixels_per_unit))
        xs, ys = self.cut_point
        x_centers = (np.arange(n_cols) + 0.5) / pixels_per_unit
        y_centers = (np.arange(n_rows) + 0.5) / pixels_per_unit
        right = (x_centers >= xs).astype(np.int8)[None, :]
        bottom = (y_centers >= ys).astype(np.int8)[:, None]
        return bottom * 2 + right


def transform_label(
    box: BoundingBox,
    scale: float,
    offset: tuple[float, float],
    crop_window: BoundingBox,
    cfg: MosaicConfig,
) -> BoundingBox | None:
    """Scale, translate, and clip one label box; None when too little survives.

    The survival rule compares the visible (clipped) area against the scaled
    box's full area, so a big object reduced to a sliver by the crop is
    dropped even though its absolute area may still be large.
    """
    if scale <= 0:
        raise ValidationError(f"scale must be positive, got {scale!r}")
    u, v = offset
    x_min = box.x_min * scale + u
    y_min = box.y_min * scale + v
    x_max = box.x_max * scale + u
    y_max = box.y_max * scale + v
    scaled_area = (x_max - x_min) * (y_max - y_min)
    cx_min = max(x_min, crop_window.x_min)
    cy_min = max(y_min, crop_window.y_min)
    cx_max = min(x_max, crop_window.x_max)
    cy_max = min(y_max, crop_window.y_max)
    if cx_min >= cx_max or cy_min >= cy_max:
        return None
    visible_area = (cx_max - cx_min) * (cy_max - cy_min)
    if visible_area < cfg.min_visible_area_ratio * scaled_area:
        return None
    return BoundingBox(cx_min, cy_min, cx_max, cy_max)


def compose_mosaic(
    inputs: Sequence[tuple[ImageRecord, Sequence[Any]]],
    cfg: MosaicConfig,
    rng: np.random.Generator,
) -> MosaicSample:
    """Combine four labeled images into one mosaic sample.

    ``inputs`` holds (image, labels) pairs in quadrant order; labels need only
    ``box`` and ``category`` attributes, so ground truths and pseudo-labels
    both work.  Randomness (cut factors, per-tile scales) comes from ``rng``
    alone, so a reused generator state reproduces the sample bit for bit.
    """
    if len(inputs) != 4:
        raise ValidationError(f"compose_mosaic needs exactly 4 inputs, got {len(inputs)}")
    w, h = cfg.canvas_width, cfg.canvas_height
    cut_x = float(rng.uniform(*cfg.cut_range))
    cut_y = float(rng.uniform(*cfg.cut_range))
    xs, ys = cut_x * w, cut_y * h
    scales = [float(rng.uniform(*cfg.scale_range)) for _ in range(4)]

    crops = (
        BoundingBox(0.0, 0.0, xs, ys),
        BoundingBox(xs, 0.0, w, ys),
        BoundingBox(0.0, ys, xs, h),
        BoundingBox(xs, ys, w, h),
    )
    tiles = []
    labels = []
    for tile_index, ((image, image_labels), crop, quadrant) in enumerate(
        zip(inputs, crops, QUADRANTS)
    ):
        s = scales[tile_index]
        sw, sh = image.width * s, image.height * s
        # Anchor each scaled image so its corner nearest the cut point sits
        # exactly on the cut point.
        if quadrant == "top-left":
            offset = (xs - sw, ys - sh)
        elif quadrant == "top-right":
            offset = (xs, ys - sh)
        elif quadrant == "bottom-left":
            offset = (xs - sw, ys)
        else:
            offset = (xs, ys)
        tiles.append(
            TilePlacement(
                source_image_id=image.image_id,
                quadrant=quadrant,
                scale=s,
                offset=offset,
                crop_window=crop,
            )
        )
        for label_index, label in enumerate(image_labels):
            out = transform_label(label.box, s, offset, crop, cfg)
            if out is not None:
                labels.append(
                    MosaicLabel(
                        box=out,
                        category=label.category,
                        source_image_id=image.image_id,
                        source_label_index=label_index,
                        tile_index=tile_index,
                    )
                )
    return MosaicSample(
        canvas_width=w,
        canvas_height=h,
        cut_point=(xs, ys),
        tiles=tuple(tiles),
        labels=tuple(labels),
    )


def mosaic_batch(
    pool: Sequence[tuple[ImageRecord, Sequence[Any]]],
    count: int,
    cfg: MosaicConfig,
    seed: int | None = None,
) -> tuple[MosaicSample, ...]:
    """Generate ``count`` mosaic samples from a pool of labeled images.

    Each sample draws four distinct pool entries (so a pool of exactly four
    uses every image once per sample); across samples the draws are
    independent.  Every sample runs on its own derived seed, which makes the
    batch order-independent and reproducible.
    """
    if count < 0:
        raise ValidationError(f"count must be non-negative, got {count}")
    if len(pool) < 4:
        raise ValidationError(f"mosaic needs a pool of >= 4 labeled images, got {len(pool)}")
    root = cfg.seed if seed is None else seed
    samples = []
    for i in range(count):
        rng = make_rng(derive_seed(root, i))
        picks = rng.choice(len(pool), size=4, replace=False)
        samples.append(compose_mosaic([pool[int(j)] for j in picks], cfg, rng))
    return tuple(samples)
