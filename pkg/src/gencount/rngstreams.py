"""Reproducible counter-based RNG substreams.

Every sampler in the package takes a ``numpy.random.Generator``.  Ensemble
drivers derive one independent Philox substream per path block from
``(seed, block index)``, so a run is reproducible from the seed alone and
identical for any worker count.
"""

from __future__ import annotations

import numpy as np

# Paths per substream block in ensemble drivers.  Fixed: changing it changes
# the stream layout and therefore the sampled numbers.
BLOCK_SIZE = 8192


def substream(seed: int, index: int = 0) -> np.random.Generator:
    """Generator for substream ``index`` of the run keyed by ``seed``."""
    ss = np.random.SeedSequence(seed, spawn_key=(index,))
    return np.random.Generator(np.random.Philox(ss))


def block_slices(n: int, block_size: int = BLOCK_SIZE):
    """Yield (block_index, slice) pairs covering range(n)."""
    for b, lo in enumerate(range(0, n, block_size)):
        yield b, slice(lo, min(lo + block_size, n))
