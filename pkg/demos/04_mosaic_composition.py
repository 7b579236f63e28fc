#!/usr/bin/env python3
"""Compose four labeled images into one mosaic and trace every label through.

Each source image is scaled and anchored so its corner nearest the cut point
lands exactly on it, then cropped to its quadrant.  Labels are scaled,
translated, and clipped along with their image; a label survives only if at
least a quarter of its scaled area stays visible.  Because a composed sample
records tile placements and label provenance, every output label can be
traced back to the exact ground-truth box it came from — which is what makes
mosaics usable as extra training rows with known answers.
"""

from sedkit import WorldConfig, compose_mosaic, default_mosaic_config, generate_world, make_rng


def main() -> None:
    world = generate_world(WorldConfig(image_count=4, seed=2))
    inputs = [(img, img.ground_truth or ()) for img in world.dataset.images]
    cfg = default_mosaic_config(world, seed=0)
    sample = compose_mosaic(inputs, cfg, make_rng(42))

    print(f"canvas {sample.canvas_width:g} x {sample.canvas_height:g}, "
          f"cut point ({sample.cut_point[0]:.2f}, {sample.cut_point[1]:.2f})\n")
    print("tile  quadrant      source   scale  crop window")
    for i, tile in enumerate(sample.tiles):
        crop = tile.crop_window
        print(
            f"  {i}   {tile.quadrant:<12}  {tile.source_image_id:<7}  "
            f"{tile.scale:5.2f}  ({crop.x_min:6.1f}, {crop.y_min:6.1f}, "
            f"{crop.x_max:6.1f}, {crop.y_max:6.1f})"
        )

    total_source_labels = sum(len(labels) for _, labels in inputs)
    print(f"\n{len(sample.labels)} of {total_source_labels} source labels survive "
          f"(visible area >= {cfg.min_visible_area_ratio:.0%} of the scaled box):\n")
    print("tile  source   label  category  transformed box")
    for label in sample.labels:
        b = label.box
        print(
            f"  {label.tile_index}   {label.source_image_id:<7}  "
            f"{label.source_label_index:>5d}  {label.category:>8d}  "
            f"({b.x_min:6.1f}, {b.y_min:6.1f}, {b.x_max:6.1f}, {b.y_max:6.1f})"
        )
    print(
        "\nlabels dropped here were either pushed outside their quadrant by the"
        " anchoring or reduced to slivers by the crop — simulated misses with"
        " geometry the pipeline fully controls."
    )


if __name__ == "__main__":
    main()
