"""Seeded random streams.

Every randomized routine takes an ``rng`` argument that may be a
``numpy.random.Generator``, an integer seed, an :class:`RngConfig`, or
``None`` (fresh entropy).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class RngConfig:
    """A 64-bit seed plus a stream id; distinct ids give independent streams."""

    seed: int
    stream: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed % 2**64, spawn_key=(self.stream,))
        return np.random.Generator(np.random.PCG64(ss))


def as_generator(rng=None) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngConfig):
        return rng.generator()
    if rng is None or isinstance(rng, (int, np.integer)):
        return np.random.default_rng(rng)
    raise TypeError(f"cannot build a random generator from {type(rng).__name__}")


def spawn(rng, n: int) -> list[np.random.Generator]:
    """``n`` independent child generators, deterministic given ``rng``."""
    return as_generator(rng).spawn(n)
