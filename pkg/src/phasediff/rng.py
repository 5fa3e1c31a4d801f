"""Seeded random streams with reproducible substream derivation.

All randomness in the package flows from a single integer seed through
counter-based Philox generators.  A stream is identified by (seed, path)
where path is a tuple of non-negative integers; substreams append one more
index to the path.  The mapping is pure: the same (seed, path) always
yields the same generator, independent of how many other streams were
created.

Conventions used elsewhere in the package:
  - per-frame noise:   frame k of a sequence uses substream(rng, k)
  - training:          iteration i uses substream(root, i); the noise for
                       batch item j inside it uses substream(iter_rng, j)
  - reverse diffusion: the stochastic term of step t uses substream(rng, t)
"""

import numpy as np


def make_rng(seed, *path):
    """Philox generator for the given seed and substream path."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(p) for p in path))
    return np.random.Generator(np.random.Philox(ss))


def substream(rng, index):
    """Child generator `index` of `rng`.

    Pure function of the parent's identity: calling it twice with the same
    arguments returns identically-seeded generators.
    """
    ss = rng.bit_generator.seed_seq
    child = np.random.SeedSequence(
        entropy=ss.entropy, spawn_key=tuple(ss.spawn_key) + (int(index),)
    )
    return np.random.Generator(np.random.Philox(child))
