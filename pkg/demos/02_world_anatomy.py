#!/usr/bin/env python3
"""Anatomy of a synthetic detection world and its deliberately blind source.

A generated world is a set of images with ground-truth objects (each carrying
a latent hardness) plus clutter distractors.  The pre-trained "source" model
is calibrated so that it misses a majority of the true objects — the domain
gap this toolkit exists to close.  The TP/FP histogram makes that visible:
true-positive mass thins out toward low confidence, and the single dominant
number is the fraction of objects the source never emits at all.
"""

import math

from sedkit import (
    WorldConfig,
    confidence_histogram,
    generate_world,
    make_source_model,
    predict,
)


def main() -> None:
    world = generate_world(WorldConfig(image_count=30, seed=3))
    dataset = world.dataset
    n_gt = sum(len(img.ground_truth or ()) for img in dataset.images)
    n_candidates = sum(len(c) for c in world.candidates.values())
    hardness = [c.hardness for cands in world.candidates.values() for c in cands]

    print(f"world: {len(dataset.images)} images, {len(dataset.category_names)} categories")
    print(f"  ground-truth objects: {n_gt}")
    print(f"  clutter distractors:  {n_candidates - n_gt}")
    print(f"  mean candidate hardness: {math.fsum(hardness) / len(hardness):.3f}\n")

    source = make_source_model(world)
    detected = predict(source, world)
    n_det = sum(len(img.detections) for img in detected.images)
    print(f"source model emits {n_det} detections for those {n_gt} objects\n")

    edges = [i / 10 for i in range(11)]
    hist = confidence_histogram(detected, edges)
    print("confidence bin   TP mass   FP mass   (fractions of ground truth)")
    for i in range(len(edges) - 1):
        print(
            f"  [{edges[i]:.1f}, {edges[i + 1]:.1f})   {hist.tp_ratio[i]:7.3f}   "
            f"{hist.fp_ratio[i]:7.3f}"
        )
    print(f"\nnever detected at any confidence: {hist.fn_ratio:.3f} of all objects")
    print(
        "TP mass plus the missed fraction sums to "
        f"{math.fsum(hist.tp_ratio) + hist.fn_ratio:.6f} — every object is either"
        " found in exactly one bin or missed."
    )


if __name__ == "__main__":
    main()
