"""Seed mixing and counter-based random streams.

All randomness in the package flows through :func:`stream`, which builds a
numpy ``Generator`` over the Philox counter-based bit generator keyed by a
(seed, stream id) pair.  Distinct stream ids give statistically independent
sequences, so adding a new consumer never shifts the draws of an existing one.
"""

import numpy as np

MASK64 = (1 << 64) - 1


def mix64(x: int) -> int:
    """SplitMix64 finalizer; a bijection on 64-bit integers."""
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def stream(seed: int, stream_id: int = 0) -> np.random.Generator:
    seq = np.random.SeedSequence([seed & MASK64, stream_id & MASK64])
    return np.random.Generator(np.random.Philox(seq))


def child_seed(seed: int, tag: int) -> int:
    """Derive a 64-bit seed for a named sub-task (PPSO run, reference run, ...)."""
    return mix64(mix64(seed & MASK64) ^ (tag & MASK64))
