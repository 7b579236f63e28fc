"""Synthetic detection world and the surrogate detector trained on it.

The world stands in for an unlabeled target domain: each image holds
ground-truth objects and clutter, and every one of them is a *candidate* the
detector may emit.  A candidate carries two latent features:

* visibility (one minus hardness) — how easy the object is to see.  Ground
  truth follows a configurable easy/hard mixture; clutter sits near the hard
  end, where it is confusable with hard positives.
* clutter affinity — how much the candidate resembles target-domain clutter,
  a cue the pre-trained source detector never learned to use.  Clutter scores
  high, true objects low, with overlapping Gaussians: a model that learns a
  negative weight on it ranks clutter below real objects, but can never
  separate them perfectly.

Every candidate additionally carries a source-perception jitter: the
pre-trained detector scores its own noisy reading of visibility (its feature
extractor was fit elsewhere), while a model retrained on this world reads the
features directly.  For clutter the jitter is biased upward — target-domain
distractors look more object-like to the source than they are, which is why
the source emits false positives in the low-confidence range at all.  That
asymmetry is the domain gap in miniature: retraining on confidently
pseudo-labeled objects yields a scorer that reads true features and simply
stops seeing the lure, while pseudo-labels taken deep into the low-confidence
region promote part of the clutter to positives — supervision that
contradicts the identically distributed clutter left as background, which no
scorer over true features can fit.

The surrogate detector is a per-category linear scorer over those features,
softmaxed against a fixed background logit.  Candidates whose foreground
confidence stays at or below an emission floor are dropped entirely — the
structural false negatives no confidence threshold can recover.

``make_source_model`` calibrates a clutter-blind scorer so that a target
fraction of ground truth falls under the emission floor, which reproduces a
detector that misses most hard objects in a new domain.  Training
(``train_surrogate``) is plain minibatch softmax cross-entropy SGD where
pseudo-labeled candidates carry their pseudo category and everything else is
background.  ``toy_noise_experiment`` reuses the same SGD core on a two-class
point set to measure how label noise drives up predictive self-entropy.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy import optimize, stats

from .boxes import BoundingBox, Dataset, Detection, GroundTruth, ImageRecord, ProbVector
from .errors import TrainingDivergedError, ValidationError
from .mosaic import MosaicConfig, mosaic_batch
from .pseudo_labels import PseudoLabelSet
from .seeding import derive_seed, make_rng

EMISSION_FLOOR = 0.05


@dataclass(frozen=True)
class WorldConfig:
    image_count: int = 64
    objects_per_image: tuple[int, int] = (3, 7)
    category_count: int = 3
    easy_mass: float = 0.5
    easy_shape: tuple[float, float] = (2.0, 6.0)
    hard_shape: tuple[float, float] = (6.0, 2.0)
    clutter_shape: tuple[float, float] = (74.0, 60.0)
    clutter_rate: float = 4.5
    clutter_lure: float = 0.2
    clutter_noise: float = 0.03
    category_confusion: float = 2.4
    target_fn_share: float = 0.55
    canvas_width: float = 256.0
    canvas_height: float = 256.0
    clutter_affinity_gap: float = 1.0
    clutter_affinity_spread: float = 0.6
    source_noise: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.image_count <= 0:
            raise ValidationError("image_count must be positive")
        lo, hi = self.objects_per_image
        if not (0 < lo <= hi):
            raise ValidationError(f"objects_per_image range invalid: {self.objects_per_image!r}")
        if self.category_count < 1:
            raise ValidationError("category_count must be >= 1")
        if not 0.0 <= self.easy_mass <= 1.0:
            raise ValidationError(f"easy_mass must lie in [0, 1], got {self.easy_mass!r}")
        for name, shape in (
            ("easy_shape", self.easy_shape),
            ("hard_shape", self.hard_shape),
            ("clutter_shape", self.clutter_shape),
        ):
            if shape[0] <= 0 or shape[1] <= 0:
                raise ValidationError(f"{name} parameters must be positive, got {shape!r}")
        if self.clutter_rate < 0:
            raise ValidationError("clutter_rate must be non-negative")
        if not math.isfinite(self.clutter_lure):
            raise ValidationError(f"clutter_lure must be finite, got {self.clutter_lure!r}")
        if self.clutter_noise < 0:
            raise ValidationError("clutter_noise must be non-negative")
        if not 0.0 <= self.category_confusion < math.inf:
            raise ValidationError(
                f"category_confusion must be non-negative, got {self.category_confusion!r}"
            )
        if not 0.0 <= self.target_fn_share < 1.0:
            raise ValidationError(f"target_fn_share must lie in [0, 1), got {self.target_fn_share!r}")
        if self.canvas_width <= 0 or self.canvas_height <= 0:
            raise ValidationError("canvas must have positive size")
        if self.clutter_affinity_spread <= 0:
            raise ValidationError("clutter_affinity_spread must be positive")
        if self.source_noise < 0:
            raise ValidationError("source_noise must be non-negative")

    def hardness_cdf(self, x) -> np.ndarray:
        """CDF of the configured easy/hard hardness mixture."""
        easy = stats.beta.cdf(x, *self.easy_shape)
        hard = stats.beta.cdf(x, *self.hard_shape)
        return self.easy_mass * easy + (1.0 - self.easy_mass) * hard


@dataclass(frozen=True)
class Candidate:
    """One emittable thing in an image: a true object or a piece of clutter.

    ``source_jitter`` is the error the pre-trained detector makes when it
    reads this candidate's visibility; retrained models see the true value.
    For clutter the jitter is biased upward (the lure): target-domain
    distractors look more object-like to the source than they really are.
    ``apparent_category`` is the identity any scorer perceives; for weak
    true objects it can differ from the ground-truth category, so labels
    harvested deep in the low-confidence range carry identity mistakes.
    """

    box: BoundingBox
    apparent_category: int
    hardness: float
    clutter_affinity: float
    gt_index: int | None
    source_jitter: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.hardness <= 1.0:
            raise ValidationError(f"hardness must lie in [0, 1], got {self.hardness!r}")
        if not math.isfinite(self.clutter_affinity):
            raise ValidationError(f"clutter_affinity must be finite, got {self.clutter_affinity!r}")
        if not math.isfinite(self.source_jitter):
            raise ValidationError(f"source_jitter must be finite, got {self.source_jitter!r}")
        if self.apparent_category < 0:
            raise ValidationError("apparent_category must be non-negative")
        for name in ("hardness", "clutter_affinity", "source_jitter"):
            object.__setattr__(self, name, float(getattr(self, name)))

    @property
    def visibility(self) -> float:
        return 1.0 - self.hardness

    @property
    def is_clutter(self) -> bool:
        return self.gt_index is None


@dataclass(frozen=True)
class WorldDataset:
    dataset: Dataset
    candidates: dict[str, tuple[Candidate, ...]]
    _lookup: dict = field(init=False, repr=False, compare=False, default_factory=dict)

    def __post_init__(self):
        ids = {img.image_id for img in self.dataset.images}
        if set(self.candidates) != ids:
            raise ValidationError("candidate map must cover exactly the dataset's images")
        lookup = {}
        for img in self.dataset.images:
            gts = img.ground_truth or ()
            seen_gt = set()
            for cand in self.candidates[img.image_id]:
                if cand.apparent_category >= self.dataset.n_foreground:
                    raise ValidationError(
                        f"image {img.image_id!r}: candidate category {cand.apparent_category} out of range"
                    )
                if cand.gt_index is not None:
                    if not 0 <= cand.gt_index < len(gts):
                        raise ValidationError(
                            f"image {img.image_id!r}: candidate gt_index {cand.gt_index} out of range"
                        )
                    gt = gts[cand.gt_index]
                    if gt.box != cand.box:
                        raise ValidationError(
                            f"image {img.image_id!r}: candidate {cand.gt_index} disagrees with its ground-truth box"
                        )
                    seen_gt.add(cand.gt_index)
                lookup[(img.image_id, cand.box.as_tuple)] = cand
            if len(seen_gt) != len(gts):
                raise ValidationError(
                    f"image {img.image_id!r}: every ground truth needs exactly one candidate"
                )
        object.__setattr__(self, "_lookup", lookup)

    @property
    def image_ids(self) -> tuple[str, ...]:
        return tuple(img.image_id for img in self.dataset.images)

    def candidate_at(self, image_id: str, box: BoundingBox) -> Candidate:
        key = (image_id, box.as_tuple)
        if key not in self._lookup:
            raise ValidationError(f"no candidate at {box.as_tuple} in image {image_id!r}")
        return self._lookup[key]


@dataclass(frozen=True)
class SurrogateModel:
    """Per-category linear scorer over (visibility, clutter affinity), plus bias.

    A candidate of apparent category ``a`` excites only channel ``a`` with its
    features; other channels contribute just their bias, and background has a
    fixed logit of zero.  Probabilities come from a temperature softmax over
    all channels plus background.

    ``perception_noise_scale`` is how strongly the model's visibility reading
    is corrupted by each candidate's source jitter: 1 for the pre-trained
    source detector, 0 for anything retrained on this world.
    """

    visibility_weights: tuple[float, ...]
    clutter_affinity_weights: tuple[float, ...]
    biases: tuple[float, ...]
    temperature: float = 1.0
    perception_noise_scale: float = 0.0

    def __post_init__(self):
        k = len(self.visibility_weights)
        if k < 1 or len(self.clutter_affinity_weights) != k or len(self.biases) != k:
            raise ValidationError("weight vectors must be non-empty and the same length")
        values = self.visibility_weights + self.clutter_affinity_weights + self.biases
        if not all(math.isfinite(v) for v in values):
            raise ValidationError("model parameters must be finite")
        if not (math.isfinite(self.temperature) and self.temperature > 0):
            raise ValidationError(f"temperature must be positive, got {self.temperature!r}")
        if not math.isfinite(self.perception_noise_scale) or self.perception_noise_scale < 0:
            raise ValidationError(
                f"perception_noise_scale must be finite and non-negative, got {self.perception_noise_scale!r}"
            )

    @property
    def n_categories(self) -> int:
        return len(self.visibility_weights)

    def as_array(self) -> np.ndarray:
        return np.column_stack([self.visibility_weights, self.clutter_affinity_weights, self.biases]).astype(
            float
        )

    @classmethod
    def from_array(cls, theta: np.ndarray, temperature: float) -> "SurrogateModel":
        return cls(
            visibility_weights=tuple(float(v) for v in theta[:, 0]),
            clutter_affinity_weights=tuple(float(v) for v in theta[:, 1]),
            biases=tuple(float(v) for v in theta[:, 2]),
            temperature=temperature,
        )

    @classmethod
    def zeros(cls, n_categories: int, temperature: float = 1.0) -> "SurrogateModel":
        return cls((0.0,) * n_categories, (0.0,) * n_categories, (0.0,) * n_categories, temperature)


@dataclass(frozen=True)
class SgdConfig:
    learning_rate: float = 0.4
    epochs: int = 100
    batch_size: int = 64
    seed: int = 0

    def __post_init__(self):
        if not (math.isfinite(self.learning_rate) and self.learning_rate > 0):
            raise ValidationError(f"learning_rate must be positive, got {self.learning_rate!r}")
        if self.epochs < 0:
            raise ValidationError("epochs must be >= 0")
        if self.batch_size < 1:
            raise ValidationError("batch_size must be >= 1")


@dataclass(frozen=True)
class TrainingResult:
    model: SurrogateModel
    loss_history: tuple[float, ...]


def generate_world(cfg: WorldConfig) -> WorldDataset:
    """Sample a world: images, ground truth with latent features, clutter."""
    rng = make_rng(cfg.seed)
    w, h = cfg.canvas_width, cfg.canvas_height
    side_lo, side_hi = 0.05 * min(w, h), 0.25 * min(w, h)

    def draw_box() -> BoundingBox:
        bw = rng.uniform(side_lo, side_hi)
        bh = rng.uniform(side_lo, side_hi)
        x1 = rng.uniform(0.0, w - bw)
        y1 = rng.uniform(0.0, h - bh)
        return BoundingBox(x1, y1, x1 + bw, y1 + bh)

    def draw_hardness(clutter: bool) -> float:
        if clutter:
            a, b = cfg.clutter_shape
        elif rng.random() < cfg.easy_mass:
            a, b = cfg.easy_shape
        else:
            a, b = cfg.hard_shape
        return float(rng.beta(a, b))

    images = []
    candidates: dict[str, tuple[Candidate, ...]] = {}
    for i in range(cfg.image_count):
        image_id = f"img-{i:04d}"
        n_objects = int(rng.integers(cfg.objects_per_image[0], cfg.objects_per_image[1] + 1))
        gts = []
        cands = []
        for j in range(n_objects):
            category = int(rng.integers(cfg.category_count))
            hardness = draw_hardness(clutter=False)
            affinity = float(rng.normal(0.0, cfg.clutter_affinity_spread))
            jitter = float(rng.normal(0.0, cfg.source_noise))
            box = draw_box()
            # Weak objects are easy to mistake for another category; any
            # scorer sees the perceived identity, evaluation sees the truth.
            apparent = category
            if cfg.category_count > 1:
                flip_p = min(cfg.category_confusion * hardness**4, 0.75)
                if rng.random() < flip_p:
                    shift = 1 + int(rng.integers(cfg.category_count - 1))
                    apparent = (category + shift) % cfg.category_count
            gts.append(GroundTruth(box=box, category=category))
            cands.append(
                Candidate(
                    box=box,
                    apparent_category=apparent,
                    hardness=hardness,
                    clutter_affinity=affinity,
                    gt_index=j,
                    source_jitter=jitter,
                )
            )
        for _ in range(int(rng.poisson(cfg.clutter_rate))):
            category = int(rng.integers(cfg.category_count))
            hardness = draw_hardness(clutter=True)
            affinity = float(
                rng.normal(cfg.clutter_affinity_gap, cfg.clutter_affinity_spread)
            )
            jitter = float(rng.normal(cfg.clutter_lure, cfg.clutter_noise))
            cands.append(
                Candidate(
                    box=draw_box(),
                    apparent_category=category,
                    hardness=hardness,
                    clutter_affinity=affinity,
                    gt_index=None,
                    source_jitter=jitter,
                )
            )
        images.append(
            ImageRecord(
                image_id=image_id,
                width=w,
                height=h,
                detections=(),
                ground_truth=tuple(gts),
            )
        )
        candidates[image_id] = tuple(cands)
    dataset = Dataset(
        images=tuple(images),
        category_names=tuple(f"category-{c}" for c in range(cfg.category_count)),
    )
    return WorldDataset(dataset=dataset, candidates=candidates)


def _candidate_logits(model: SurrogateModel, cand: Candidate) -> np.ndarray:
    logits = np.array(model.biases, dtype=float)
    a = cand.apparent_category
    seen_visibility = cand.visibility + model.perception_noise_scale * cand.source_jitter
    logits[a] += (
        model.visibility_weights[a] * seen_visibility + model.clutter_affinity_weights[a] * cand.clutter_affinity
    )
    return logits


def _softmax_with_background(logits: np.ndarray, temperature: float) -> np.ndarray:
    z = np.append(logits, 0.0) / temperature
    z -= z.max()
    e = np.exp(z)
    return e / e.sum()


def predict(
    model: SurrogateModel,
    world: WorldDataset,
    emission_floor: float = EMISSION_FLOOR,
) -> Dataset:
    """Emit detections for every candidate confident enough to surface.

    A candidate is emitted iff its maximum foreground probability exceeds
    ``emission_floor``; the rest vanish without trace, forming the structural
    false negatives.  Ground truth is carried over untouched.
    """
    if model.n_categories != world.dataset.n_foreground:
        raise ValidationError(
            f"model has {model.n_categories} categories, world has {world.dataset.n_foreground}"
        )
    if not 0.0 <= emission_floor < 1.0:
        raise ValidationError(f"emission_floor must lie in [0, 1), got {emission_floor!r}")
    images = []
    for img in world.dataset.images:
        detections = []
        for cand in world.candidates[img.image_id]:
            probs = _softmax_with_background(_candidate_logits(model, cand), model.temperature)
            if probs[:-1].max() > emission_floor:
                detections.append(
                    Detection.from_probs(cand.box, ProbVector(tuple(float(p) for p in probs)))
                )
        images.append(
            ImageRecord(
                image_id=img.image_id,
                width=img.width,
                height=img.height,
                detections=tuple(detections),
                ground_truth=img.ground_truth,
            )
        )
    return Dataset(images=tuple(images), category_names=world.dataset.category_names)


def make_source_model(
    world: WorldDataset,
    target_fn_share: float = 0.55,
    emission_floor: float = EMISSION_FLOOR,
    anchor_prob: float = 0.95,
    anchor_quantile: float = 0.975,
    temperature: float = 1.0,
) -> SurrogateModel:
    """Calibrate a clutter-blind scorer that misses a set share of ground truth.

    Two conditions pin the (shared) visibility weight and bias: the
    ``target_fn_share`` quantile of ground-truth visibility (as the source
    perceives it, jitter included) must sit exactly at the emission floor,
    and the ``anchor_quantile`` visibility must score ``anchor_prob``.  Both
    are empirical quantiles of this world, so the realized miss share matches
    the target up to one object.  The clutter-affinity weight is zero —
    learning to discount target clutter is exactly what adaptation can add.
    """
    if not 0.0 < target_fn_share < 1.0:
        raise ValidationError(f"target_fn_share must lie in (0, 1), got {target_fn_share!r}")
    if not emission_floor < anchor_prob < 1.0:
        raise ValidationError("anchor_prob must lie between the emission floor and 1")
    visibilities = np.array(
        [
            cand.visibility + cand.source_jitter
            for image_id in world.image_ids
            for cand in world.candidates[image_id]
            if not cand.is_clutter
        ]
    )
    if visibilities.size < 2:
        raise ValidationError("calibration needs at least two ground-truth candidates")
    v_cut = float(np.quantile(visibilities, target_fn_share))
    v_hi = float(np.quantile(visibilities, anchor_quantile))
    if v_hi <= v_cut:
        raise ValidationError(
            "cannot calibrate: anchor visibility does not exceed the miss-share visibility"
        )
    k = world.dataset.n_foreground
    floor_odds = emission_floor / (1.0 - emission_floor)
    anchor_odds = anchor_prob / (1.0 - anchor_prob)
    weight = temperature * math.log(anchor_odds / floor_odds) / (v_hi - v_cut)

    def gap(b: float) -> float:
        # Foreground probability at v_cut equals the floor when this is zero.
        others = (k - 1) * math.exp(b / temperature) + 1.0
        return (weight * v_cut + b) / temperature - math.log(others * floor_odds)

    lo, hi = -1.0, 1.0
    while gap(lo) > 0:
        lo *= 2
        if lo < -1e6:
            raise ValidationError("source-model calibration failed to bracket the bias")
    while gap(hi) < 0:
        hi *= 2
        if hi > 1e6:
            raise ValidationError("source-model calibration failed to bracket the bias")
    bias = float(optimize.brentq(gap, lo, hi, xtol=1e-12))
    return SurrogateModel(
        visibility_weights=(weight,) * k,
        clutter_affinity_weights=(0.0,) * k,
        biases=(bias,) * k,
        temperature=temperature,
        perception_noise_scale=1.0,
    )


def _cross_entropy(
    features: np.ndarray, targets: np.ndarray, theta: np.ndarray, temperature: float
) -> float:
    logits = np.einsum("nkf,kf->nk", features, theta) / temperature
    logits = np.concatenate([logits, np.zeros((logits.shape[0], 1))], axis=1)
    peak = logits.max(axis=1, keepdims=True)
    log_norm = peak[:, 0] + np.log(np.exp(logits - peak).sum(axis=1))
    return float(np.mean(log_norm - logits[np.arange(len(targets)), targets]))


def _fit_sgd(
    features: np.ndarray,
    targets: np.ndarray,
    theta0: np.ndarray,
    temperature: float,
    cfg: SgdConfig,
) -> tuple[np.ndarray, tuple[float, ...]]:
    """Minibatch softmax-CE SGD over class-gated features.

    ``features`` has shape (rows, categories, feature) and ``targets`` holds
    class indices where index == category count means background (a fixed
    zero logit, never a parameter).  Returns the final parameters and the
    full-set loss measured before training and after every epoch.
    """
    n, k, _ = features.shape
    if n == 0:
        raise ValidationError("cannot train on zero rows")
    rng = make_rng(cfg.seed)
    theta = theta0.astype(float).copy()
    history = [_cross_entropy(features, targets, theta, temperature)]
    for _ in range(cfg.epochs):
        order = rng.permutation(n)
        for start in range(0, n, cfg.batch_size):
            batch = order[start : start + cfg.batch_size]
            x = features[batch]
            logits = np.einsum("nkf,kf->nk", x, theta) / temperature
            logits = np.concatenate([logits, np.zeros((len(batch), 1))], axis=1)
            logits -= logits.max(axis=1, keepdims=True)
            probs = np.exp(logits)
            probs /= probs.sum(axis=1, keepdims=True)
            probs[np.arange(len(batch)), targets[batch]] -= 1.0
            grad = np.einsum("nk,nkf->kf", probs[:, :k], x) / (len(batch) * temperature)
            theta -= cfg.learning_rate * grad
        if not np.isfinite(theta).all():
            raise TrainingDivergedError("parameters became non-finite during SGD")
        history.append(_cross_entropy(features, targets, theta, temperature))
    return theta, tuple(history)


def build_training_rows(
    world: WorldDataset, labels: PseudoLabelSet
) -> tuple[np.ndarray, np.ndarray]:
    """Candidate rows for the trainer: pseudo-positives keep their pseudo
    category, every other candidate is background."""
    k = world.dataset.n_foreground
    positive = {
        (label.image_id, label.box.as_tuple): label.category for label in labels.labels
    }
    rows = []
    targets = []
    for image_id in world.image_ids:
        for cand in world.candidates[image_id]:
            x = np.zeros((k, 3))
            x[cand.apparent_category, 0] = cand.visibility
            x[cand.apparent_category, 1] = cand.clutter_affinity
            x[:, 2] = 1.0
            rows.append(x)
            targets.append(positive.get((image_id, cand.box.as_tuple), k))
    return np.array(rows), np.array(targets, dtype=int)


def mosaic_training_rows(
    world: WorldDataset,
    labels: PseudoLabelSet,
    cfg: MosaicConfig,
    count: int,
    seed: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Extra positive rows manufactured by mosaic composition.

    Each surviving mosaic label inherits its source candidate's clutter
    affinity but a reduced visibility: scaling by ``s`` multiplies visibility
    by ``s`` and a partial crop multiplies it by the visible-area fraction,
    clamped to [0, 1].  The result is positives that look like the hard objects the
    source detector misses.  A pool with fewer than four labeled images
    yields no rows, so callers can always mix the output in.
    """
    by_id = {img.image_id: img for img in world.dataset.images}
    pool = [
        (by_id[image_id], labels.by_image(image_id))
        for image_id in labels.image_ids
        if labels.by_image(image_id)
    ]
    k = world.dataset.n_foreground
    if len(pool) < 4 or count == 0:
        return np.zeros((0, k, 3)), np.zeros(0, dtype=int)
    rows = []
    targets = []
    for sample in mosaic_batch(pool, count, cfg, seed):
        for label in sample.labels:
            tile = sample.tiles[label.tile_index]
            source_label = labels.by_image(label.source_image_id)[label.source_label_index]
            cand = world.candidate_at(label.source_image_id, source_label.box)
            scaled_area = tile.scale**2 * source_label.box.area
            visible_fraction = label.box.area / scaled_area
            visibility = min(1.0, max(0.0, cand.visibility * tile.scale * visible_fraction))
            x = np.zeros((k, 3))
            x[label.category, 0] = visibility
            x[label.category, 1] = cand.clutter_affinity
            x[:, 2] = 1.0
            rows.append(x)
            targets.append(label.category)
    if not rows:
        return np.zeros((0, k, 3)), np.zeros(0, dtype=int)
    return np.array(rows), np.array(targets, dtype=int)


def train_surrogate(
    model: SurrogateModel,
    world: WorldDataset,
    labels: PseudoLabelSet,
    cfg: SgdConfig,
    extra_rows: tuple[np.ndarray, np.ndarray] | None = None,
) -> TrainingResult:
    """Fit the scorer to pseudo-labels by softmax cross-entropy SGD.

    Training always starts from ``model`` (the caller decides whether that is
    the source model or something else).  ``extra_rows`` lets mosaic-mode
    callers append synthetic positives.  Zero epochs returns the input model
    with just the initial loss measured.
    """
    features, targets = build_training_rows(world, labels)
    if extra_rows is not None and len(extra_rows[1]):
        features = np.concatenate([features, extra_rows[0]])
        targets = np.concatenate([targets, extra_rows[1]])
    theta, history = _fit_sgd(features, targets, model.as_array(), model.temperature, cfg)
    if cfg.epochs == 0:
        return TrainingResult(model=model, loss_history=history)
    return TrainingResult(
        model=SurrogateModel.from_array(theta, model.temperature), loss_history=history
    )


class SurrogateTrainer:
    """Adapter exposing the surrogate world as a sweep-compatible trainer.

    Holds the world, the starting model, and the SGD recipe; every ``train``
    call restarts from the same starting model.  With a mosaic configuration
    the trainer augments each training set with synthetic hard positives
    (one mosaic sample per world image by default).
    """

    def __init__(
        self,
        world: WorldDataset,
        source_model: SurrogateModel,
        sgd: SgdConfig | None = None,
        emission_floor: float = EMISSION_FLOOR,
        mosaic: MosaicConfig | None = None,
        mosaic_count: int | None = None,
    ):
        self.world = world
        self.source_model = source_model
        self.sgd = sgd if sgd is not None else SgdConfig()
        self.emission_floor = emission_floor
        self.mosaic = mosaic
        self.mosaic_count = (
            mosaic_count if mosaic_count is not None else len(world.dataset.images)
        )
        self.last_loss_history: tuple[float, ...] = ()

    def _check(self, dataset: Dataset):
        if tuple(img.image_id for img in dataset.images) != self.world.image_ids:
            raise ValidationError("dataset does not match this trainer's world")

    def train(self, dataset: Dataset, labels: PseudoLabelSet, seed: int) -> SurrogateModel:
        self._check(dataset)
        extra = None
        if self.mosaic is not None:
            extra = mosaic_training_rows(
                self.world, labels, self.mosaic, self.mosaic_count, derive_seed(seed, 1)
            )
        result = train_surrogate(
            self.source_model,
            self.world,
            labels,
            replace(self.sgd, seed=derive_seed(seed, 0)),
            extra_rows=extra,
        )
        self.last_loss_history = result.loss_history
        return result.model

    def predict(self, model: SurrogateModel, dataset: Dataset) -> Dataset:
        self._check(dataset)
        return predict(model, self.world, self.emission_floor)


def default_mosaic_config(world: WorldDataset, seed: int = 0) -> MosaicConfig:
    """Mosaic canvas twice the world's image size, standard cut/scale ranges."""
    first = world.dataset.images[0]
    return MosaicConfig(
        canvas_width=2.0 * first.width,
        canvas_height=2.0 * first.height,
        seed=seed,
    )


@dataclass(frozen=True)
class ToyPoint:
    noise_degree: float
    entropy_positive_mix: float
    entropy_negative_mix: float
    entropy_mean: float


def _toy_entropy(x: np.ndarray, targets: np.ndarray, cfg: SgdConfig) -> float:
    """Fit a two-class softmax scorer to (x, targets) and return the mean
    normalized self-entropy of its own predictions on the same points."""
    features = np.zeros((x.size, 2, 2))
    features[:, 0, 0] = x
    features[:, 1, 0] = x
    features[:, :, 1] = 1.0
    theta = np.zeros((2, 2))
    rng = make_rng(cfg.seed)
    for _ in range(cfg.epochs):
        order = rng.permutation(x.size)
        for start in range(0, x.size, cfg.batch_size):
            batch = order[start : start + cfg.batch_size]
            xb = features[batch]
            logits = np.einsum("nkf,kf->nk", xb, theta)
            logits -= logits.max(axis=1, keepdims=True)
            probs = np.exp(logits)
            probs /= probs.sum(axis=1, keepdims=True)
            probs[np.arange(len(batch)), targets[batch]] -= 1.0
            theta -= cfg.learning_rate * np.einsum("nk,nkf->kf", probs, xb) / len(batch)
    if not np.isfinite(theta).all():
        raise TrainingDivergedError("toy classifier diverged")
    logits = np.einsum("nkf,kf->nk", features, theta)
    logits -= logits.max(axis=1, keepdims=True)
    probs = np.exp(logits)
    probs /= probs.sum(axis=1, keepdims=True)
    plogp = np.where(probs > 0, probs * np.log(probs), 0.0)
    return float(-plogp.sum(axis=1).mean() / 2.0)


def toy_noise_experiment(
    noise_degrees: Sequence[float] = tuple(round(0.05 * i, 2) for i in range(11)),
    trials: int = 3,
    seed: int = 0,
    sgd: SgdConfig | None = None,
    points_per_class: int = 150,
    class_separation: float = 2.0,
    class_spread: float = 0.4,
) -> tuple[ToyPoint, ...]:
    """Label-noise-versus-entropy curve on a separable two-class point set.

    For each noise degree d, a fraction d of one class's labels is flipped
    into the other — once mixing positives into the negative set, once the
    reverse — the classifier is retrained from scratch, and the mean
    self-entropy of its predictions is recorded.  Results are averaged over
    ``trials`` independently drawn point sets.
    """
    degrees = tuple(float(d) for d in noise_degrees)
    if not degrees:
        raise ValidationError("noise_degrees is empty")
    if any(not 0.0 <= d <= 0.5 for d in degrees):
        raise ValidationError("noise degrees must lie in [0, 0.5]")
    if trials < 1:
        raise ValidationError("trials must be >= 1")
    if points_per_class < 2:
        raise ValidationError("points_per_class must be >= 2")
    base = sgd if sgd is not None else SgdConfig(learning_rate=0.3, epochs=50, batch_size=32)

    half = class_separation / 2.0
    sums = np.zeros((len(degrees), 2))
    for trial in range(trials):
        data_rng = make_rng(derive_seed(seed, trial))
        x = np.concatenate(
            [
                data_rng.normal(half, class_spread, points_per_class),
                data_rng.normal(-half, class_spread, points_per_class),
            ]
        )
        clean = np.concatenate(
            [np.zeros(points_per_class, dtype=int), np.ones(points_per_class, dtype=int)]
        )
        for j, degree in enumerate(degrees):
            flips = int(round(degree * points_per_class))
            for direction in (0, 1):
                targets = clean.copy()
                if flips:
                    flip_rng = make_rng(derive_seed(seed, trial, j, direction))
                    chosen = flip_rng.choice(points_per_class, size=flips, replace=False)
                    if direction == 0:
                        targets[chosen] = 1  # positives mixed into the negative set
                    else:
                        targets[points_per_class + chosen] = 0
                cfg = replace(base, seed=derive_seed(seed, trial, j, direction, 1))
                sums[j, direction] += _toy_entropy(x, targets, cfg)
    sums /= trials
    return tuple(
        ToyPoint(
            noise_degree=degree,
            entropy_positive_mix=float(sums[j, 1]),
            entropy_negative_mix=float(sums[j, 0]),
            entropy_mean=float(sums[j].mean()),
        )
        for j, degree in enumerate(degrees)
    )
