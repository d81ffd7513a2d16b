"""Deterministic RNG derivation.

All randomness in the library flows through ``rng_for``: a PCG64 generator
keyed by an integer seed plus optional sub-keys (trial index, attempt
counter).  Same key, same stream, on any platform with the same numpy.
"""

import numpy as np


def rng_for(*key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(tuple(int(k) for k in key)))
