"""Seeded random streams.

Every consumer draws from its own stream derived from one 64-bit seed via
``SeedSequence(seed, spawn_key=(stream_id,))``, so adding a consumer or running
consumers in a different order never changes another consumer's numbers.
"""

import numpy as np

STREAM_IDS = {
    "selector": 1,
    "generators": 2,
    "bench": 3,
    "thinning": 4,
    "window": 5,
}


def stream(seed, name):
    if name not in STREAM_IDS:
        raise KeyError(f"unknown random stream {name!r}")
    seed = int(seed) & 0xFFFFFFFFFFFFFFFF
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(STREAM_IDS[name],)))
