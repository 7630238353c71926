"""Seed derivation and stream splitting.

Every random decision in the package comes from a PCG64 stream derived with
``numpy.random.SeedSequence(seed, spawn_key=keys)``.  Keys are tuples of
non-negative integers; a given ``(seed, keys)`` pair always yields the same
stream on every platform, and distinct key tuples yield independent streams.

Key namespaces in use (first key element):

    0  graph generation, (0, iteration, node)
    1  orphan closure pass
    2  structural functions
    3  node names, (3, style code)
    4  observed root states
    5  what-if set, (5, wi_n)
    6  benchmark assembly: graph seeds, (6, shape code, iterations, index)
"""
from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1

GRAPH = 0
CLOSURE = 1
FUNCTIONS = 2
NAMES = 3
OBSERVED = 4
WHATIF = 5
ASSEMBLY = 6


def _sequence(seed: int, keys: tuple[int, ...]) -> np.random.SeedSequence:
    return np.random.SeedSequence(int(seed) & MASK64, spawn_key=tuple(int(k) for k in keys))


def stream(seed: int, *keys: int) -> np.random.Generator:
    """Return the child generator for ``keys`` under ``seed``."""
    return np.random.Generator(np.random.PCG64(_sequence(seed, keys)))


def derive_seed(seed: int, *keys: int) -> int:
    """Return a 63-bit child seed; fits a signed 64-bit integer and JSON."""
    word = _sequence(seed, keys).generate_state(1, dtype=np.uint64)[0]
    return int(word) >> 1
