"""Command-line surface: configuration, pipeline orchestration, curve emission.

Subcommands
-----------
- ``toy``       label-noise-versus-entropy curve on the two-class point set
- ``world gen`` generate a synthetic detection world and save it as JSON
- ``sweep``     threshold sweep + entropy-descent selection, CSV per threshold
- ``adapt``     full pipeline (sweep, select, retrain); ``--mosaic`` augments
- ``analyze``   TP/FP-per-confidence-bin histogram of a dataset with GT
- ``mosaic``    compose a batch of four-tile mosaics with full provenance
- ``eval``      mean average precision of saved detections against GT

Configuration comes from an optional TOML file (flat typed keys grouped in
sections: ``run``, ``world``, ``sgd``, ``sweep``, ``toy``, ``mosaic``,
``analyze``, ``eval``); command-line flags override file values.  Every run
is reproducible from its own output: emitted CSVs carry the full resolved
configuration in a leading comment line.  All outputs land inside the
configured output directory, written atomically (write-then-rename).
Exit codes: 0 success, 1 validation error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from typing import Any, Mapping, Sequence

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .curves import line_plot_svg, write_csv, write_svg
from .dataset_io import (
    atomic_write_text,
    load_dataset,
    load_world,
    save_mosaic_batch,
    save_world,
)
from .errors import ValidationError
from .metrics import confidence_histogram, evaluate_map, mean_self_entropy
from .mosaic import MosaicConfig, mosaic_batch
from .sweep import DEFAULT_GRID, DEFAULT_PLATEAU_EPSILON, adapt, run_sweep, select_threshold
from .world import (
    EMISSION_FLOOR,
    SgdConfig,
    SurrogateTrainer,
    WorldConfig,
    WorldDataset,
    default_mosaic_config,
    generate_world,
    make_source_model,
    predict,
    toy_noise_experiment,
)

__all__ = ["RunConfig", "build_run_config", "main"]

_TOY_DEGREES = tuple(round(0.05 * i, 2) for i in range(11))


@dataclasses.dataclass(frozen=True)
class RunConfig:
    """Everything a run needs, resolved from defaults, config file, and flags."""

    out_dir: str = "out"
    seed: int = 0
    emit_svg: bool = False
    dataset_path: str | None = None
    world: WorldConfig = dataclasses.field(default_factory=WorldConfig)
    sgd: SgdConfig = dataclasses.field(default_factory=SgdConfig)
    emission_floor: float = EMISSION_FLOOR
    grid: tuple[float, ...] = DEFAULT_GRID
    plateau_epsilon: float = DEFAULT_PLATEAU_EPSILON
    mosaic_enabled: bool = False
    mosaic_count: int | None = None
    mosaic_cut_range: tuple[float, float] = (0.3, 0.7)
    mosaic_scale_range: tuple[float, float] = (0.5, 1.5)
    mosaic_min_visible_area_ratio: float = 0.25
    toy_trials: int = 3
    toy_degrees: tuple[float, ...] = _TOY_DEGREES
    analyze_bins: int = 10
    iou_threshold: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.emission_floor < 1.0:
            raise ValidationError(f"emission_floor must lie in [0, 1), got {self.emission_floor!r}")
        if self.analyze_bins < 1:
            raise ValidationError("analyze_bins must be >= 1")
        if not 0.0 < self.iou_threshold <= 1.0:
            raise ValidationError(f"iou_threshold must lie in (0, 1], got {self.iou_threshold!r}")
        if self.mosaic_count is not None and self.mosaic_count < 1:
            raise ValidationError("mosaic_count must be >= 1")


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems as validation errors (exit 1)."""

    def error(self, message: str):
        raise ValidationError(message)


def _load_toml(path: str) -> dict[str, dict[str, Any]]:
    try:
        with open(path, "rb") as handle:
            doc = tomllib.load(handle)
    except OSError as exc:
        raise ValidationError(f"cannot read config file {path!r}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ValidationError(f"config file {path!r}: {exc}") from exc
    for section, table in doc.items():
        if not isinstance(table, dict):
            raise ValidationError(
                f"config file {path!r}: top level must contain sections, "
                f"found bare key {section!r}"
            )
    return doc


_SECTIONS = ("run", "world", "sgd", "sweep", "toy", "mosaic", "analyze", "eval")
_RUN_KEYS = {"out", "seed", "emit_svg"}
_SWEEP_KEYS = {"grid", "plateau_epsilon", "emission_floor"}
_TOY_KEYS = {"trials", "degrees"}
_MOSAIC_KEYS = {"count", "cut_range", "scale_range", "min_visible_area_ratio"}
_ANALYZE_KEYS = {"bins"}
_EVAL_KEYS = {"iou_threshold"}


def _check_keys(section: str, table: Mapping[str, Any], allowed: set[str]):
    for key in table:
        if key not in allowed:
            raise ValidationError(f"config section [{section}] has unknown key {key!r}")


def _tupleize(value: Any) -> Any:
    return tuple(value) if isinstance(value, list) else value


def _dataclass_from_section(cls, section: str, table: Mapping[str, Any]):
    fields = {f.name: f for f in dataclasses.fields(cls)}
    _check_keys(section, table, set(fields))
    try:
        return cls(**{key: _tupleize(value) for key, value in table.items()})
    except TypeError as exc:
        raise ValidationError(f"config section [{section}]: {exc}") from exc


def _parse_float_list(text: str, flag: str) -> tuple[float, ...]:
    try:
        return tuple(float(part) for part in text.split(",") if part.strip())
    except ValueError as exc:
        raise ValidationError(f"{flag} expects comma-separated numbers, got {text!r}") from exc


def build_run_config(args: argparse.Namespace) -> RunConfig:
    """Merge precedence: dataclass defaults < config file sections < CLI flags."""
    doc: dict[str, dict[str, Any]] = {}
    if args.config is not None:
        doc = _load_toml(args.config)
        for section in doc:
            if section not in _SECTIONS:
                raise ValidationError(f"config file has unknown section [{section}]")

    run_tbl = doc.get("run", {})
    _check_keys("run", run_tbl, _RUN_KEYS)
    seed = run_tbl.get("seed", 0)
    if args.seed is not None:
        seed = args.seed
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise ValidationError(f"seed must be an integer, got {seed!r}")
    out_dir = run_tbl.get("out", "out")
    if args.out is not None:
        out_dir = args.out
    emit_svg = bool(run_tbl.get("emit_svg", False)) or bool(getattr(args, "emit_svg", False))

    world_tbl = dict(doc.get("world", {}))
    world_tbl.setdefault("seed", seed)
    if getattr(args, "image_count", None) is not None:
        world_tbl["image_count"] = args.image_count
    world = _dataclass_from_section(WorldConfig, "world", world_tbl)

    sgd_tbl = dict(doc.get("sgd", {}))
    if getattr(args, "epochs", None) is not None:
        sgd_tbl["epochs"] = args.epochs
    if getattr(args, "learning_rate", None) is not None:
        sgd_tbl["learning_rate"] = args.learning_rate
    sgd = _dataclass_from_section(SgdConfig, "sgd", sgd_tbl)

    sweep_tbl = doc.get("sweep", {})
    _check_keys("sweep", sweep_tbl, _SWEEP_KEYS)
    grid = _tupleize(sweep_tbl.get("grid", DEFAULT_GRID))
    if getattr(args, "grid", None) is not None:
        grid = _parse_float_list(args.grid, "--grid")
    plateau_epsilon = sweep_tbl.get("plateau_epsilon", DEFAULT_PLATEAU_EPSILON)
    if getattr(args, "plateau_epsilon", None) is not None:
        plateau_epsilon = args.plateau_epsilon
    emission_floor = sweep_tbl.get("emission_floor", EMISSION_FLOOR)

    toy_tbl = doc.get("toy", {})
    _check_keys("toy", toy_tbl, _TOY_KEYS)
    toy_trials = toy_tbl.get("trials", 3)
    if getattr(args, "trials", None) is not None:
        toy_trials = args.trials
    toy_degrees = _tupleize(toy_tbl.get("degrees", _TOY_DEGREES))
    if getattr(args, "degrees", None) is not None:
        toy_degrees = _parse_float_list(args.degrees, "--degrees")

    mosaic_tbl = doc.get("mosaic", {})
    _check_keys("mosaic", mosaic_tbl, _MOSAIC_KEYS)
    mosaic_count = mosaic_tbl.get("count")
    if getattr(args, "count", None) is not None:
        mosaic_count = args.count

    analyze_tbl = doc.get("analyze", {})
    _check_keys("analyze", analyze_tbl, _ANALYZE_KEYS)
    analyze_bins = analyze_tbl.get("bins", 10)
    if getattr(args, "bins", None) is not None:
        analyze_bins = args.bins

    eval_tbl = doc.get("eval", {})
    _check_keys("eval", eval_tbl, _EVAL_KEYS)
    iou_threshold = eval_tbl.get("iou_threshold", 0.5)
    if getattr(args, "iou", None) is not None:
        iou_threshold = args.iou

    return RunConfig(
        out_dir=out_dir,
        seed=seed,
        emit_svg=emit_svg,
        dataset_path=getattr(args, "dataset", None),
        world=world,
        sgd=sgd,
        emission_floor=emission_floor,
        grid=tuple(float(h) for h in grid),
        plateau_epsilon=float(plateau_epsilon),
        mosaic_enabled=bool(getattr(args, "mosaic", False)),
        mosaic_count=mosaic_count,
        mosaic_cut_range=_tupleize(mosaic_tbl.get("cut_range", (0.3, 0.7))),
        mosaic_scale_range=_tupleize(mosaic_tbl.get("scale_range", (0.5, 1.5))),
        mosaic_min_visible_area_ratio=mosaic_tbl.get("min_visible_area_ratio", 0.25),
        toy_trials=toy_trials,
        toy_degrees=tuple(float(d) for d in toy_degrees),
        analyze_bins=analyze_bins,
        iou_threshold=float(iou_threshold),
    )


def _out_path(cfg: RunConfig, name: str) -> str:
    os.makedirs(cfg.out_dir, exist_ok=True)
    return os.path.join(cfg.out_dir, name)


def _config_comment(cfg: RunConfig, command: str, **extra: object) -> dict[str, object]:
    doc: dict[str, object] = {"command": command, "seed": cfg.seed, "out": cfg.out_dir}
    doc.update(extra)
    return doc


def _world_items(cfg: RunConfig) -> dict[str, object]:
    return {f"world.{f.name}": getattr(cfg.world, f.name) for f in dataclasses.fields(WorldConfig)}


def _sgd_items(cfg: RunConfig) -> dict[str, object]:
    # the per-run seed is derived from the sweep seed, not from this value
    return {
        "sgd.learning_rate": cfg.sgd.learning_rate,
        "sgd.epochs": cfg.sgd.epochs,
        "sgd.batch_size": cfg.sgd.batch_size,
    }


def _obtain_world(cfg: RunConfig) -> tuple[WorldDataset, str]:
    if cfg.dataset_path is not None:
        return load_world(cfg.dataset_path), cfg.dataset_path
    return generate_world(cfg.world), "<generated>"


def _mosaic_config(cfg: RunConfig, world: WorldDataset) -> MosaicConfig:
    base = default_mosaic_config(world, seed=cfg.seed)
    return dataclasses.replace(
        base,
        cut_range=cfg.mosaic_cut_range,
        scale_range=cfg.mosaic_scale_range,
        min_visible_area_ratio=cfg.mosaic_min_visible_area_ratio,
    )


def _cmd_toy(cfg: RunConfig) -> int:
    points = toy_noise_experiment(cfg.toy_degrees, trials=cfg.toy_trials, seed=cfg.seed)
    comment = _config_comment(
        cfg,
        "toy",
        **{"toy.trials": cfg.toy_trials, "toy.degrees": list(cfg.toy_degrees)},
    )
    rows = [
        (p.noise_degree, p.entropy_positive_mix, p.entropy_negative_mix, p.entropy_mean)
        for p in points
    ]
    path = _out_path(cfg, "toy.csv")
    write_csv(
        path,
        (
            "noise_degree_fraction",
            "entropy_positive_mix_nats",
            "entropy_negative_mix_nats",
            "mean_self_entropy_nats",
        ),
        rows,
        comment,
    )
    if cfg.emit_svg:
        degrees = [p.noise_degree for p in points]
        write_svg(
            _out_path(cfg, "toy.svg"),
            line_plot_svg(
                "Label noise vs. predictive self-entropy",
                "noise degree (fraction of flipped labels)",
                "mean self-entropy (nats)",
                [
                    ("positive mix", degrees, [p.entropy_positive_mix for p in points]),
                    ("negative mix", degrees, [p.entropy_negative_mix for p in points]),
                    ("mean", degrees, [p.entropy_mean for p in points]),
                ],
            ),
        )
    print(f"toy: {len(points)} noise degrees -> {path}")
    return 0


def _cmd_world_gen(cfg: RunConfig) -> int:
    world = generate_world(cfg.world)
    path = _out_path(cfg, "world.json")
    save_world(world, path)
    n_gt = world.dataset.total_ground_truth()
    n_cand = sum(len(c) for c in world.candidates.values())
    print(
        f"world: {len(world.dataset.images)} images, {n_gt} ground-truth objects, "
        f"{n_cand - n_gt} clutter candidates -> {path}"
    )
    return 0


def _sweep_rows(points, selected_index: int):
    rows = []
    for i, p in enumerate(points):
        rows.append(
            (
                p.threshold,
                p.mean_self_entropy,
                p.mean_ap if p.mean_ap is not None else "",
                p.positives_count,
                i == selected_index,
            )
        )
    return rows


_SWEEP_HEADER = (
    "confidence_threshold",
    "mean_self_entropy_nats",
    "mean_average_precision",
    "pseudo_label_count",
    "selected",
)


def _write_sweep_json(cfg: RunConfig, points, threshold: float, kind: str, index: int):
    doc = {
        "selected_threshold": threshold,
        "selection_kind": kind,
        "selected_index": index,
        "points": [
            {
                "confidence_threshold": p.threshold,
                "mean_self_entropy_nats": p.mean_self_entropy,
                "mean_average_precision": p.mean_ap,
                "pseudo_label_count": p.positives_count,
            }
            for p in points
        ],
    }
    atomic_write_text(_out_path(cfg, "sweep.json"), json.dumps(doc, indent=2) + "\n")


def _emit_sweep_svg(cfg: RunConfig, points, threshold: float):
    xs = [p.threshold for p in points]
    write_svg(
        _out_path(cfg, "sweep_entropy.svg"),
        line_plot_svg(
            "Mean self-entropy per confidence threshold",
            "confidence threshold",
            "mean self-entropy (nats)",
            [("entropy", xs, [p.mean_self_entropy for p in points])],
            mark_x=threshold,
        ),
    )
    if all(p.mean_ap is not None for p in points):
        write_svg(
            _out_path(cfg, "sweep_map.svg"),
            line_plot_svg(
                "mAP per confidence threshold",
                "confidence threshold",
                "mean average precision",
                [("mAP", xs, [p.mean_ap for p in points])],
                mark_x=threshold,
            ),
        )


def _prepare_pipeline(cfg: RunConfig):
    world, origin = _obtain_world(cfg)
    source = make_source_model(
        world,
        target_fn_share=cfg.world.target_fn_share,
        emission_floor=cfg.emission_floor,
    )
    source_pred = predict(source, world, cfg.emission_floor)
    return world, origin, source, source_pred


def _pipeline_comment(cfg: RunConfig, command: str, origin: str, **extra) -> dict[str, object]:
    doc = _config_comment(cfg, command, dataset=origin)
    doc.update(
        {
            "sweep.grid": list(cfg.grid),
            "sweep.plateau_epsilon": cfg.plateau_epsilon,
            "sweep.emission_floor": cfg.emission_floor,
        }
    )
    doc.update(_world_items(cfg))
    doc.update(_sgd_items(cfg))
    doc.update(extra)
    return doc


def _cmd_sweep(cfg: RunConfig) -> int:
    world, origin, source, source_pred = _prepare_pipeline(cfg)
    trainer = SurrogateTrainer(world, source, sgd=cfg.sgd, emission_floor=cfg.emission_floor)
    points = run_sweep(source_pred, trainer, cfg.grid, cfg.seed)
    threshold, kind, index = select_threshold(points, cfg.plateau_epsilon)
    path = _out_path(cfg, "sweep.csv")
    write_csv(
        path,
        _SWEEP_HEADER,
        _sweep_rows(points, index),
        _pipeline_comment(cfg, "sweep", origin),
    )
    _write_sweep_json(cfg, points, threshold, kind, index)
    if cfg.emit_svg:
        _emit_sweep_svg(cfg, points, threshold)
    print(
        f"sweep: selected threshold {threshold:g} ({kind}), "
        f"mean self-entropy {points[index].mean_self_entropy:.6f} -> {path}"
    )
    return 0


def _cmd_adapt(cfg: RunConfig) -> int:
    world, origin, source, source_pred = _prepare_pipeline(cfg)
    mosaic_cfg = _mosaic_config(cfg, world) if cfg.mosaic_enabled else None
    trainer = SurrogateTrainer(
        world,
        source,
        sgd=cfg.sgd,
        emission_floor=cfg.emission_floor,
        mosaic=mosaic_cfg,
        mosaic_count=cfg.mosaic_count,
    )
    model, result = adapt(source_pred, trainer, cfg.grid, cfg.seed, cfg.plateau_epsilon)
    adapted_pred = trainer.predict(model, source_pred)

    source_map = evaluate_map(source_pred, cfg.iou_threshold).mean_ap
    adapted_map = evaluate_map(adapted_pred, cfg.iou_threshold).mean_ap
    adapted_entropy = mean_self_entropy(adapted_pred).mean_self_entropy

    comment = _pipeline_comment(
        cfg,
        "adapt",
        origin,
        **{"mosaic.enabled": cfg.mosaic_enabled},
    )
    if cfg.mosaic_enabled:
        comment.update(
            {
                "mosaic.count": cfg.mosaic_count
                if cfg.mosaic_count is not None
                else len(world.dataset.images),
                "mosaic.cut_range": list(cfg.mosaic_cut_range),
                "mosaic.scale_range": list(cfg.mosaic_scale_range),
                "mosaic.min_visible_area_ratio": cfg.mosaic_min_visible_area_ratio,
            }
        )
    sweep_path = _out_path(cfg, "sweep.csv")
    write_csv(sweep_path, _SWEEP_HEADER, _sweep_rows(result.points, result.selected_index), comment)
    adapt_path = _out_path(cfg, "adapt.csv")
    write_csv(
        adapt_path,
        (
            "selected_confidence_threshold",
            "selection_kind",
            "selected_mean_self_entropy_nats",
            "source_mean_average_precision",
            "adapted_mean_average_precision",
            "adapted_model_mean_self_entropy_nats",
            "mosaic_enabled",
        ),
        [
            (
                result.selected_threshold,
                result.selection_kind,
                result.points[result.selected_index].mean_self_entropy,
                source_map,
                adapted_map,
                adapted_entropy,
                cfg.mosaic_enabled,
            )
        ],
        comment,
    )
    _write_sweep_json(
        cfg, result.points, result.selected_threshold, result.selection_kind, result.selected_index
    )
    if cfg.emit_svg:
        _emit_sweep_svg(cfg, result.points, result.selected_threshold)
    print(
        f"adapt: threshold {result.selected_threshold:g} ({result.selection_kind}), "
        f"mAP {source_map:.4f} -> {adapted_map:.4f}"
        f"{' with mosaic' if cfg.mosaic_enabled else ''} -> {adapt_path}"
    )
    return 0


def _cmd_analyze(cfg: RunConfig) -> int:
    if cfg.dataset_path is not None:
        dataset = load_dataset(cfg.dataset_path)
        origin = cfg.dataset_path
    else:
        _, origin, _, dataset = _prepare_pipeline(cfg)
    edges = [i / cfg.analyze_bins for i in range(cfg.analyze_bins + 1)]
    hist = confidence_histogram(dataset, edges)
    comment = _config_comment(cfg, "analyze", dataset=origin)
    comment["analyze.bins"] = cfg.analyze_bins
    if cfg.dataset_path is None:
        comment.update(_world_items(cfg))
        comment["sweep.emission_floor"] = cfg.emission_floor
    rows: list[tuple[object, ...]] = []
    for i in range(len(hist.bin_edges) - 1):
        rows.append(("tp", hist.bin_edges[i], hist.bin_edges[i + 1], hist.tp_ratio[i]))
        rows.append(("fp", hist.bin_edges[i], hist.bin_edges[i + 1], hist.fp_ratio[i]))
    rows.append(("fn", "", "", hist.fn_ratio))
    path = _out_path(cfg, "analyze.csv")
    write_csv(
        path,
        ("row_kind", "confidence_bin_low", "confidence_bin_high", "ratio_of_ground_truth"),
        rows,
        comment,
    )
    if cfg.emit_svg:
        mids = [
            (hist.bin_edges[i] + hist.bin_edges[i + 1]) / 2.0
            for i in range(len(hist.bin_edges) - 1)
        ]
        write_svg(
            _out_path(cfg, "analyze.svg"),
            line_plot_svg(
                "TP/FP mass per confidence bin (fractions of ground truth)",
                "detection confidence",
                "ratio of ground truth",
                [("tp", mids, list(hist.tp_ratio)), ("fp", mids, list(hist.fp_ratio))],
            ),
        )
    print(f"analyze: fn_ratio {hist.fn_ratio:.4f} over {cfg.analyze_bins} bins -> {path}")
    return 0


def _cmd_mosaic(cfg: RunConfig) -> int:
    world, origin = _obtain_world(cfg)
    count = cfg.mosaic_count if cfg.mosaic_count is not None else len(world.dataset.images)
    pool = [(img, img.ground_truth or ()) for img in world.dataset.images]
    samples = mosaic_batch(pool, count, _mosaic_config(cfg, world), seed=cfg.seed)
    path = _out_path(cfg, "mosaic.json")
    save_mosaic_batch(samples, path)
    n_labels = sum(len(s.labels) for s in samples)
    print(f"mosaic: {len(samples)} samples, {n_labels} transformed labels from {origin} -> {path}")
    return 0


def _cmd_eval(cfg: RunConfig) -> int:
    if cfg.dataset_path is None:
        raise ValidationError("eval requires --dataset (a JSON file with detections and ground truth)")
    dataset = load_dataset(cfg.dataset_path)
    report = evaluate_map(dataset, cfg.iou_threshold)
    comment = _config_comment(cfg, "eval", dataset=cfg.dataset_path)
    comment["eval.iou_threshold"] = cfg.iou_threshold
    rows: list[tuple[object, ...]] = []
    for category, ap in sorted(report.per_category.items()):
        name = (
            dataset.category_names[category]
            if category < len(dataset.category_names)
            else ""
        )
        rows.append((category, name, ap))
    rows.append(("mean", "", report.mean_ap))
    path = _out_path(cfg, "eval.csv")
    write_csv(path, ("category_index", "category_name", "average_precision"), rows, comment)
    print(f"eval: mAP {report.mean_ap:.4f} over {len(report.per_category)} categories -> {path}")
    return 0


def _add_common(parser: argparse.ArgumentParser, *, dataset: bool = False, train: bool = False):
    parser.add_argument("--config", help="TOML config file; flags override its values")
    parser.add_argument("--out", help="output directory (default: out)")
    parser.add_argument("--seed", type=int, help="global seed (default: 0)")
    parser.add_argument("--emit-svg", action="store_true", help="also write SVG plots")
    if dataset:
        parser.add_argument("--dataset", help="input JSON dataset (default: generate a world)")
        parser.add_argument("--image-count", type=int, help="generated world size")
    if train:
        parser.add_argument("--grid", help="comma-separated confidence thresholds, high to low")
        parser.add_argument("--plateau-epsilon", type=float, help="descent sensitivity")
        parser.add_argument("--epochs", type=int, help="SGD epochs per sweep point")
        parser.add_argument("--learning-rate", type=float, help="SGD learning rate")


def _build_parser() -> _Parser:
    parser = _Parser(prog="sedkit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p_toy = sub.add_parser("toy", help="label-noise-versus-entropy experiment")
    _add_common(p_toy)
    p_toy.add_argument("--trials", type=int, help="independent point sets to average")
    p_toy.add_argument("--degrees", help="comma-separated noise degrees in [0, 0.5]")
    p_toy.set_defaults(func=_cmd_toy)

    p_world = sub.add_parser("world", help="synthetic world operations")
    world_sub = p_world.add_subparsers(dest="world_command", required=True)
    p_gen = world_sub.add_parser("gen", help="generate and save a world")
    _add_common(p_gen)
    p_gen.add_argument("--image-count", type=int, help="generated world size")
    p_gen.set_defaults(func=_cmd_world_gen)

    p_sweep = sub.add_parser("sweep", help="threshold sweep with entropy-descent selection")
    _add_common(p_sweep, dataset=True, train=True)
    p_sweep.set_defaults(func=_cmd_sweep)

    p_adapt = sub.add_parser("adapt", help="sweep, select, and retrain at the chosen threshold")
    _add_common(p_adapt, dataset=True, train=True)
    p_adapt.add_argument("--mosaic", action="store_true", help="augment with mosaic composites")
    p_adapt.add_argument("--count", type=int, dest="count", help="mosaic samples per training run")
    p_adapt.set_defaults(func=_cmd_adapt)

    p_analyze = sub.add_parser("analyze", help="TP/FP mass per confidence bin")
    _add_common(p_analyze, dataset=True)
    p_analyze.add_argument("--bins", type=int, help="number of equal confidence bins")
    p_analyze.set_defaults(func=_cmd_analyze)

    p_mosaic = sub.add_parser("mosaic", help="compose a batch of mosaics with provenance")
    _add_common(p_mosaic, dataset=True)
    p_mosaic.add_argument("--count", type=int, help="number of mosaic samples")
    p_mosaic.set_defaults(func=_cmd_mosaic)

    p_eval = sub.add_parser("eval", help="mAP of saved detections against ground truth")
    _add_common(p_eval, dataset=True)
    p_eval.add_argument("--iou", type=float, help="IoU threshold for matching (default: 0.5)")
    p_eval.set_defaults(func=_cmd_eval)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = build_run_config(args)
        return args.func(cfg)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 — CLI boundary: map failures to exit 2
        print(f"failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
