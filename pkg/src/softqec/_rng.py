"""Deterministic random-stream construction.

Every stochastic entry point takes an integer seed. Internally each
logical stream (a worker batch, an independent experiment arm) gets its
own counter-based generator keyed by (seed, stream index), so results do
not depend on scheduling order or worker count.
"""

from __future__ import annotations

import numpy as np


def rng_for(seed: int, stream: int = 0) -> np.random.Generator:
    """Generator for one (seed, stream) pair; streams never overlap."""
    if seed < 0 or stream < 0:
        raise ValueError("seed and stream must be non-negative")
    key = np.array([seed, stream], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def batch_streams(seed: int, batches: int) -> list[np.random.Generator]:
    """Independent generators for an ordered sequence of work batches."""
    return [rng_for(seed, stream) for stream in range(batches)]
