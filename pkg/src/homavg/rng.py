"""Deterministic, splittable random streams.

Every stochastic routine takes an explicit 64-bit master seed and derives
its stream from ``(seed, *path)`` through numpy's SeedSequence hashing on
top of the counter-based Philox generator.  Streams derived from distinct
paths are independent, and a result computed from per-task paths does not
depend on how tasks are scheduled across threads.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1

# Stream tags used as the first path component, so that different kinds of
# draws inside one evaluation never collide.
OUTER_POINTS = 1
INNER_WEIGHT = 2
PAIR_LEFT = 3
PAIR_RIGHT = 4
LEAF_CHOICE = 5
LEAF_OFFSET = 6


def seed_sequence(master: int, *path: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(
        entropy=int(master) & _MASK64,
        spawn_key=tuple(int(p) & _MASK64 for p in path),
    )


def generator(master: int, *path: int) -> np.random.Generator:
    """Philox generator for the stream addressed by (master, *path)."""
    return np.random.Generator(np.random.Philox(seed_sequence(master, *path)))
