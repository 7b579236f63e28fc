"""Deterministic seed derivation for multi-stage experiments.

Every stochastic stage takes an integer seed and builds its own
``numpy.random.Generator`` from Philox, so two runs with the same top-level
seed produce byte-identical artifacts.  Derived seeds come from
``SeedSequence`` spawn keys, which keeps sibling streams statistically
independent of each other and of the parent.
"""
from __future__ import annotations

import numpy as np


def derive_seed(seed: int, *key: int) -> int:
    """Child seed for stage ``key`` of the experiment rooted at ``seed``."""
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    seq = np.random.SeedSequence(entropy=seed, spawn_key=tuple(key))
    return int(seq.generate_state(1, dtype=np.uint64)[0])


def make_rng(seed: int) -> np.random.Generator:
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    return np.random.Generator(np.random.Philox(seed))
