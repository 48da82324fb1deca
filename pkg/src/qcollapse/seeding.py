"""Counter-based random stream splitting.

Every random draw in a run comes from a PCG64 generator seeded by
``SeedSequence([seed, purpose, index])``.  ``purpose`` separates the uses
(oracle construction, Simon trials, Zeno trajectories) and ``index`` is the
trial or trajectory number, so each stream depends only on its own
coordinates and parallel execution reproduces serial results exactly.
"""
from __future__ import annotations

import numpy as np

ORACLE = 0
SIMON_TRIAL = 1
ZENO_TRAJECTORY = 2
PERIOD = 3
INSTANCE = 4
WAVES = 5

SEED_MASK = (1 << 64) - 1


def stream(seed: int, purpose: int, index: int = 0) -> np.random.Generator:
    if not 0 <= seed <= SEED_MASK:
        raise ValueError(f"seed {seed} is not a 64-bit unsigned integer")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, purpose, index])))


def derived_seed(seed: int, purpose: int, index: int = 0) -> int:
    """A plain integer seed drawn from the same split, for APIs that take ints."""
    ss = np.random.SeedSequence([seed, purpose, index])
    return int(ss.generate_state(1, dtype=np.uint64)[0])
