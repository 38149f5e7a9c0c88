"""Counter-based random streams.

Every stochastic routine takes an explicit seed and derives independent
streams by index from a Philox generator, so results never depend on
call order or thread scheduling.
"""

from __future__ import annotations

import numpy as np


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Generator for (seed, stream); distinct streams are independent."""
    return np.random.Generator(np.random.Philox(key=np.uint64([seed, stream])))
