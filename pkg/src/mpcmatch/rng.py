"""Deterministic seed derivation for nested randomized stages."""

from __future__ import annotations

import numpy as np


def seed_sequence(seed, *keys) -> np.random.SeedSequence:
    if seed is None:
        return np.random.SeedSequence()
    return np.random.SeedSequence([int(seed), *[int(k) for k in keys]])


def subseed(seed, *keys) -> int:
    """Stable derived integer seed for (seed, keys)."""
    return int(seed_sequence(seed, *keys).generate_state(1, dtype=np.uint64)[0])


def rng_from(seed, *keys) -> np.random.Generator:
    return np.random.default_rng(seed_sequence(seed, *keys))
