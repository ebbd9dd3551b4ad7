"""Seeded random streams.

All randomness goes through PCG64 generators seeded from a
``numpy.random.SeedSequence``.  Each consumer (ordering shuffles, tie
breaking, random baselines, synthetic noise) draws from its own derived
stream, so re-seeding one purpose never perturbs another.  PCG64 output is
platform independent for a given seed sequence.
"""

from __future__ import annotations

import numpy as np

# Fixed codes; never reorder, they are part of the reproducibility contract.
_PURPOSES = {
    "ordering": 1,
    "tie": 2,
    "random_k": 3,
    "mixed_k": 4,
    "synthetic": 5,
}


def stream(seed: int | None, purpose: str) -> np.random.Generator:
    """Return the generator for ``purpose`` derived from ``seed``.

    ``seed=None`` is treated as 0 so that every run stays reproducible.
    """
    try:
        code = _PURPOSES[purpose]
    except KeyError:
        raise ValueError(f"unknown random stream purpose {purpose!r}") from None
    seq = np.random.SeedSequence(0 if seed is None else int(seed), spawn_key=(code,))
    return np.random.Generator(np.random.PCG64(seq))
