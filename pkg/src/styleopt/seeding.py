"""Deterministic seed derivation for the session workflow.

Every random draw in a session comes from a generator derived from the
session master seed plus a purpose tag (and usually a round index), so a
whole run is a pure function of its configuration and the labels received.
"""

import numpy as np

TAG_INIT = 1
TAG_QUERY = 2
TAG_PAIRS = 3
TAG_TRAIN = 4
TAG_EVAL = 5
TAG_ORACLE = 6


def derive_seed(*parts: int) -> int:
    """Stable scalar seed from a tuple of non-negative integers."""
    return int(np.random.SeedSequence(list(parts)).generate_state(1, np.uint64)[0])


def derive_rng(*parts: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(list(parts)))
