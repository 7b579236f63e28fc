"""Versioned JSON serialization for datasets, worlds, and mosaic batches.

Schema (version 1)::

    {
      "version": 1,
      "categories": ["car", "bike", ...],
      "images": [
        {
          "id": "img-0000",
          "width": 256.0,
          "height": 256.0,
          "ground_truth": [{"box": [x_min, y_min, x_max, y_max], "category": 0}, ...],
          "detections":   [{"box": [...], "probs": [p_fg..., p_bg]}, ...],
          "candidates":   [{"box": [...], "apparent_category": 0,
                            "hardness": 0.62, "clutter_affinity": 0.11,
                            "source_jitter": 0.04, "gt_index": null}, ...]
        },
        ...
      ]
    }

``ground_truth``, ``detections``, and ``candidates`` are each optional per
image.  Loading validates through the same constructors used everywhere
else, so a file cannot smuggle in states that code cannot build; every
rejection names the image and field that caused it.  Serialization uses
``repr``-faithful floats and a fixed key order, so save -> load -> save is
byte-stable.
"""

from __future__ import annotations

import json
import os
import tempfile
from typing import Any

from .boxes import (
    BoundingBox,
    Dataset,
    Detection,
    GroundTruth,
    ImageRecord,
    ProbVector,
)
from .errors import ValidationError
from .mosaic import MosaicLabel, MosaicSample, TilePlacement
from .pseudo_labels import PseudoLabel, PseudoLabelSet
from .world import Candidate, WorldDataset

SCHEMA_VERSION = 1

__all__ = [
    "SCHEMA_VERSION",
    "atomic_write_text",
    "load_dataset",
    "save_dataset",
    "load_world",
    "save_world",
    "save_mosaic_batch",
    "load_mosaic_batch",
    "save_pseudo_labels",
    "load_pseudo_labels",
]


def atomic_write_text(path: str, text: str) -> None:
    """Write via a sibling temp file and rename, so readers never see halves."""
    target = os.path.abspath(path)
    directory = os.path.dirname(target)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.splitext(target)[1])
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise



def _box_to_json(box: BoundingBox) -> list[float]:
    return [box.x_min, box.y_min, box.x_max, box.y_max]


def _box_from_json(raw: Any, where: str) -> BoundingBox:
    if not isinstance(raw, list) or len(raw) != 4:
        raise ValidationError(f"{where}: box must be a list of four numbers, got {raw!r}")
    coords = []
    for value in raw:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ValidationError(f"{where}: box coordinates must be numbers, got {value!r}")
        coords.append(float(value))
    try:
        return BoundingBox(*coords)
    except ValidationError as exc:
        raise ValidationError(f"{where}: {exc}") from exc


def _require(raw: dict, key: str, kind, where: str):
    if key not in raw:
        raise ValidationError(f"{where}: missing required field {key!r}")
    value = raw[key]
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ValidationError(f"{where}.{key}: expected a number, got {value!r}")
        return float(value)
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ValidationError(f"{where}.{key}: expected an integer, got {value!r}")
        return value
    if not isinstance(value, kind):
        raise ValidationError(f"{where}.{key}: expected {kind.__name__}, got {value!r}")
    return value


def _image_to_json(img: ImageRecord, candidates: tuple[Candidate, ...] | None) -> dict:
    doc: dict[str, Any] = {"id": img.image_id, "width": img.width, "height": img.height}
    if img.ground_truth is not None:
        doc["ground_truth"] = [
            {"box": _box_to_json(gt.box), "category": gt.category} for gt in img.ground_truth
        ]
    if img.detections:
        doc["detections"] = [
            {"box": _box_to_json(det.box), "probs": list(det.probs.values)}
            for det in img.detections
        ]
    if candidates is not None:
        doc["candidates"] = [
            {
                "box": _box_to_json(cand.box),
                "apparent_category": cand.apparent_category,
                "hardness": cand.hardness,
                "clutter_affinity": cand.clutter_affinity,
                "source_jitter": cand.source_jitter,
                "gt_index": cand.gt_index,
            }
            for cand in candidates
        ]
    return doc


def _image_from_json(raw: Any, index: int) -> tuple[ImageRecord, tuple[Candidate, ...] | None]:
    where = f"images[{index}]"
    if not isinstance(raw, dict):
        raise ValidationError(f"{where}: expected an object, got {raw!r}")
    image_id = _require(raw, "id", str, where)
    where = f"image {image_id!r}"
    width = _require(raw, "width", float, where)
    height = _require(raw, "height", float, where)

    ground_truth = None
    if "ground_truth" in raw:
        if not isinstance(raw["ground_truth"], list):
            raise ValidationError(f"{where} ground_truth: expected a list")
        ground_truth = []
        for i, entry in enumerate(raw["ground_truth"]):
            spot = f"{where} ground_truth[{i}]"
            if not isinstance(entry, dict):
                raise ValidationError(f"{spot}: expected an object")
            box = _box_from_json(entry.get("box"), spot)
            category = _require(entry, "category", int, spot)
            try:
                ground_truth.append(GroundTruth(box=box, category=category))
            except ValidationError as exc:
                raise ValidationError(f"{spot}: {exc}") from exc
        ground_truth = tuple(ground_truth)

    detections: list[Detection] = []
    if "detections" in raw:
        if not isinstance(raw["detections"], list):
            raise ValidationError(f"{where} detections: expected a list")
        for i, entry in enumerate(raw["detections"]):
            spot = f"{where} detections[{i}]"
            if not isinstance(entry, dict):
                raise ValidationError(f"{spot}: expected an object")
            box = _box_from_json(entry.get("box"), spot)
            probs_raw = entry.get("probs")
            if not isinstance(probs_raw, list):
                raise ValidationError(f"{spot}.probs: expected a list of numbers")
            for p in probs_raw:
                if isinstance(p, bool) or not isinstance(p, (int, float)):
                    raise ValidationError(f"{spot}.probs: expected numbers, got {p!r}")
            try:
                probs = ProbVector(tuple(float(p) for p in probs_raw))
                detections.append(Detection.from_probs(box, probs))
            except ValidationError as exc:
                raise ValidationError(f"{spot}: {exc}") from exc

    candidates: tuple[Candidate, ...] | None = None
    if "candidates" in raw:
        if not isinstance(raw["candidates"], list):
            raise ValidationError(f"{where} candidates: expected a list")
        parsed = []
        for i, entry in enumerate(raw["candidates"]):
            spot = f"{where} candidates[{i}]"
            if not isinstance(entry, dict):
                raise ValidationError(f"{spot}: expected an object")
            box = _box_from_json(entry.get("box"), spot)
            gt_index = entry.get("gt_index")
            if gt_index is not None and (isinstance(gt_index, bool) or not isinstance(gt_index, int)):
                raise ValidationError(f"{spot}.gt_index: expected an integer or null")
            try:
                parsed.append(
                    Candidate(
                        box=box,
                        apparent_category=_require(entry, "apparent_category", int, spot),
                        hardness=_require(entry, "hardness", float, spot),
                        clutter_affinity=_require(entry, "clutter_affinity", float, spot),
                        gt_index=gt_index,
                        source_jitter=_require(entry, "source_jitter", float, spot),
                    )
                )
            except ValidationError as exc:
                raise ValidationError(f"{spot}: {exc}") from exc
        candidates = tuple(parsed)

    try:
        record = ImageRecord(
            image_id=image_id,
            width=width,
            height=height,
            detections=tuple(detections),
            ground_truth=ground_truth,
        )
    except ValidationError as exc:
        raise ValidationError(f"{where}: {exc}") from exc
    return record, candidates


def _document_to_json(dataset: Dataset, candidates: dict | None) -> str:
    doc = {
        "version": SCHEMA_VERSION,
        "categories": list(dataset.category_names),
        "images": [
            _image_to_json(img, candidates.get(img.image_id) if candidates else None)
            for img in dataset.images
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


def _document_from_json(path: str) -> tuple[Dataset, dict[str, tuple[Candidate, ...]], bool]:
    try:
        with open(path) as handle:
            raw = json.load(handle)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: malformed JSON ({exc})") from exc
    if not isinstance(raw, dict):
        raise ValidationError(f"{path}: expected a top-level object")
    version = raw.get("version")
    if version != SCHEMA_VERSION:
        raise ValidationError(
            f"{path}: unsupported schema version {version!r} (expected {SCHEMA_VERSION})"
        )
    categories = raw.get("categories")
    if not isinstance(categories, list) or not all(isinstance(c, str) for c in categories):
        raise ValidationError(f"{path}: categories must be a list of strings")
    images_raw = raw.get("images")
    if not isinstance(images_raw, list):
        raise ValidationError(f"{path}: images must be a list")
    images = []
    candidates: dict[str, tuple[Candidate, ...]] = {}
    any_candidates = False
    for index, entry in enumerate(images_raw):
        record, cands = _image_from_json(entry, index)
        images.append(record)
        if cands is not None:
            any_candidates = True
            candidates[record.image_id] = cands
        else:
            candidates[record.image_id] = ()
    try:
        dataset = Dataset(images=tuple(images), category_names=tuple(categories))
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}") from exc
    return dataset, candidates, any_candidates


def save_dataset(dataset: Dataset, path: str) -> None:
    """Serialize a dataset (without latent candidate features) to JSON."""
    atomic_write_text(path, _document_to_json(dataset, None))


def load_dataset(path: str) -> Dataset:
    """Load a dataset, ignoring candidate annotations if present."""
    dataset, _, _ = _document_from_json(path)
    return dataset


def save_world(world: WorldDataset, path: str) -> None:
    """Serialize a world: the dataset plus every candidate's latent features."""
    atomic_write_text(path, _document_to_json(world.dataset, world.candidates))


def load_world(path: str) -> WorldDataset:
    """Load a world; every image must carry candidate annotations."""
    dataset, candidates, any_candidates = _document_from_json(path)
    if not any_candidates:
        raise ValidationError(f"{path}: no candidate annotations; not a world file")
    try:
        return WorldDataset(dataset=dataset, candidates=candidates)
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}") from exc


def save_pseudo_labels(label_set: PseudoLabelSet, dataset: Dataset, path: str) -> None:
    """Serialize pseudo-labels in the dataset schema with threshold provenance.

    ``dataset`` supplies the image geometry; it must list exactly the images
    the label set was generated from.
    """
    if tuple(img.image_id for img in dataset.images) != label_set.image_ids:
        raise ValidationError("label set and dataset list different images")
    doc = {
        "version": SCHEMA_VERSION,
        "provenance": {"confidence_threshold": label_set.threshold},
        "images": [
            {
                "id": img.image_id,
                "width": img.width,
                "height": img.height,
                "pseudo_labels": [
                    {
                        "box": _box_to_json(label.box),
                        "category": label.category,
                        "confidence": label.confidence,
                    }
                    for label in label_set.by_image(img.image_id)
                ],
            }
            for img in dataset.images
        ],
    }
    atomic_write_text(path, json.dumps(doc, indent=2) + "\n")


def load_pseudo_labels(path: str) -> PseudoLabelSet:
    """Load a pseudo-label file saved by :func:`save_pseudo_labels`."""
    try:
        with open(path) as handle:
            raw = json.load(handle)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: malformed JSON ({exc})") from exc
    if not isinstance(raw, dict) or raw.get("version") != SCHEMA_VERSION:
        raise ValidationError(f"{path}: unsupported pseudo-label document")
    provenance = raw.get("provenance")
    if not isinstance(provenance, dict) or "confidence_threshold" not in provenance:
        raise ValidationError(f"{path}: missing provenance.confidence_threshold")
    threshold = provenance["confidence_threshold"]
    if isinstance(threshold, bool) or not isinstance(threshold, (int, float)):
        raise ValidationError(f"{path}: provenance.confidence_threshold must be a number")
    threshold = float(threshold)
    images_raw = raw.get("images")
    if not isinstance(images_raw, list):
        raise ValidationError(f"{path}: images must be a list")
    labels: list[PseudoLabel] = []
    image_ids: list[str] = []
    for index, entry in enumerate(images_raw):
        where = f"images[{index}]"
        if not isinstance(entry, dict):
            raise ValidationError(f"{where}: expected an object")
        image_id = _require(entry, "id", str, where)
        where = f"image {image_id!r}"
        image_ids.append(image_id)
        entries = entry.get("pseudo_labels", [])
        if not isinstance(entries, list):
            raise ValidationError(f"{where} pseudo_labels: expected a list")
        for i, label_raw in enumerate(entries):
            spot = f"{where} pseudo_labels[{i}]"
            if not isinstance(label_raw, dict):
                raise ValidationError(f"{spot}: expected an object")
            confidence = _require(label_raw, "confidence", float, spot)
            if not confidence > threshold:
                raise ValidationError(
                    f"{spot}: confidence {confidence!r} not above threshold {threshold!r}"
                )
            labels.append(
                PseudoLabel(
                    image_id=image_id,
                    box=_box_from_json(label_raw.get("box"), spot),
                    category=_require(label_raw, "category", int, spot),
                    confidence=confidence,
                )
            )
    return PseudoLabelSet(threshold=threshold, labels=tuple(labels), image_ids=tuple(image_ids))


def _tile_to_json(tile: TilePlacement) -> dict:
    return {
        "source_image_id": tile.source_image_id,
        "quadrant": tile.quadrant,
        "scale": tile.scale,
        "offset": list(tile.offset),
        "crop_window": _box_to_json(tile.crop_window),
    }


def _label_to_json(label: MosaicLabel) -> dict:
    return {
        "box": _box_to_json(label.box),
        "category": label.category,
        "source_image_id": label.source_image_id,
        "source_label_index": label.source_label_index,
        "tile_index": label.tile_index,
    }


def save_mosaic_batch(samples: list[MosaicSample] | tuple[MosaicSample, ...], path: str) -> None:
    """Serialize composed mosaic samples with their full provenance."""
    doc = {
        "version": SCHEMA_VERSION,
        "samples": [
            {
                "canvas_width": sample.canvas_width,
                "canvas_height": sample.canvas_height,
                "cut_point": list(sample.cut_point),
                "tiles": [_tile_to_json(tile) for tile in sample.tiles],
                "labels": [_label_to_json(label) for label in sample.labels],
            }
            for sample in samples
        ],
    }
    atomic_write_text(path, json.dumps(doc, indent=2) + "\n")


def load_mosaic_batch(path: str) -> tuple[MosaicSample, ...]:
    """Load mosaic samples saved by :func:`save_mosaic_batch`."""
    try:
        with open(path) as handle:
            raw = json.load(handle)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: malformed JSON ({exc})") from exc
    if not isinstance(raw, dict) or raw.get("version") != SCHEMA_VERSION:
        raise ValidationError(f"{path}: unsupported mosaic batch document")
    samples = []
    for s_index, entry in enumerate(raw.get("samples", ())):
        where = f"samples[{s_index}]"
        if not isinstance(entry, dict):
            raise ValidationError(f"{where}: expected an object")
        tiles = []
        for t_index, tile_raw in enumerate(entry.get("tiles", ())):
            spot = f"{where}.tiles[{t_index}]"
            if not isinstance(tile_raw, dict):
                raise ValidationError(f"{spot}: expected an object")
            offset = tile_raw.get("offset")
            if not isinstance(offset, list) or len(offset) != 2:
                raise ValidationError(f"{spot}.offset: expected [x, y]")
            tiles.append(
                TilePlacement(
                    source_image_id=_require(tile_raw, "source_image_id", str, spot),
                    quadrant=_require(tile_raw, "quadrant", str, spot),
                    scale=_require(tile_raw, "scale", float, spot),
                    offset=(float(offset[0]), float(offset[1])),
                    crop_window=_box_from_json(tile_raw.get("crop_window"), spot),
                )
            )
        labels = []
        for l_index, label_raw in enumerate(entry.get("labels", ())):
            spot = f"{where}.labels[{l_index}]"
            if not isinstance(label_raw, dict):
                raise ValidationError(f"{spot}: expected an object")
            labels.append(
                MosaicLabel(
                    box=_box_from_json(label_raw.get("box"), spot),
                    category=_require(label_raw, "category", int, spot),
                    source_image_id=_require(label_raw, "source_image_id", str, spot),
                    source_label_index=_require(label_raw, "source_label_index", int, spot),
                    tile_index=_require(label_raw, "tile_index", int, spot),
                )
            )
        cut = entry.get("cut_point")
        if not isinstance(cut, list) or len(cut) != 2:
            raise ValidationError(f"{where}.cut_point: expected [x, y]")
        try:
            samples.append(
                MosaicSample(
                    canvas_width=_require(entry, "canvas_width", float, where),
                    canvas_height=_require(entry, "canvas_height", float, where),
                    cut_point=(float(cut[0]), float(cut[1])),
                    tiles=tuple(tiles),
                    labels=tuple(labels),
                )
            )
        except ValidationError as exc:
            raise ValidationError(f"{where}: {exc}") from exc
    return tuple(samples)
