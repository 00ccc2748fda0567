"""Seedable, splittable random streams.

All simulation randomness flows through Philox counter-based generators keyed
by ``(seed, round, replica)`` spawn keys, so replicas can be evaluated in
parallel (or in any order) and still reproduce bit-for-bit.
"""

from __future__ import annotations

import numpy as np

__all__ = ["stream", "replica_stream", "round_stream"]


def stream(seed: int, *path: int) -> np.random.Generator:
    """Return a Generator for the stream addressed by ``seed`` and a spawn path.

    Identical arguments always give an identical stream; distinct paths give
    statistically independent streams.
    """
    ss = np.random.SeedSequence(entropy=seed, spawn_key=tuple(path))
    return np.random.Generator(np.random.Philox(ss))


def replica_stream(seed: int, replica: int) -> np.random.Generator:
    """Stream for one Monte Carlo replica; rounds draw sequentially from it."""
    return stream(seed, 0, replica)


def round_stream(seed: int, round_index: int, replica: int = 0) -> np.random.Generator:
    """Stream dedicated to a single round of a single replica."""
    return stream(seed, 1, replica, round_index)
