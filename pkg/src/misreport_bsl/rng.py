"""Counter-based random streams.

Every random draw in the package comes from a Philox generator keyed by a
master seed plus an integer path, e.g. ``(LOGLIK, proposal, replicate)``.
Streams are independent of execution order, so parallel and sequential
runs agree bit for bit.
"""

from __future__ import annotations

import numpy as np


# top-level stream namespaces
LOGLIK = 0
PROPOSAL = 1
INIT = 2
DATA = 3
OBSERVE = 4
RECONSTRUCT = 5
OPTIM = 6


def stream(seed: int, *path: int) -> np.random.Generator:
    """Return the Philox generator for ``seed`` at position ``path``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(p) for p in path))
    return np.random.Generator(np.random.Philox(ss))


def derive_seed(seed: int, *path: int) -> int:
    """Hash ``(seed, *path)`` to a fresh 64-bit seed."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(p) for p in path))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def as_generator(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return stream(seed)
