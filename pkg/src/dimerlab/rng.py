"""Seeded random streams.

Every Monte Carlo routine takes a 64-bit seed and an optional stream index;
streams with different indices never overlap, so replicas can run in parallel.
"""
import numpy as np

GENERATOR_NAME = "numpy.random.Philox(SeedSequence(seed, spawn_key=(stream,)))"


def make_generator(seed: int, stream: int = 0) -> np.random.Generator:
    if not 0 <= int(seed) < 2**64:
        raise ValueError("seed must be a 64-bit unsigned integer")
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(stream),))
    return np.random.Generator(np.random.Philox(ss))
