"""Seeded randomness.

Every random draw in the simulator comes from numpy's PCG64 bit generator
(``numpy.random.Generator(PCG64(seed))``). PCG64 and the Generator methods used
here (``random``, ``uniform``, ``integers``, ``bytes``) have a stream that numpy
keeps stable across platforms and releases, so a seed fully determines a run.
"""

from __future__ import annotations

import numpy as np

Rng = np.random.Generator


def make_rng(seed: int | Rng) -> Rng:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(int(seed)))


def child_rng(seed: int, *stream: int) -> Rng:
    """Independent stream keyed by ``seed`` and a tuple of integers."""
    seq = np.random.SeedSequence(int(seed), spawn_key=tuple(int(s) for s in stream))
    return np.random.Generator(np.random.PCG64(seq))
