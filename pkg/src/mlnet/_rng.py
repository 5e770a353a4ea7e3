"""Seed derivation.

Every random stream is derived from a base seed plus a purpose tag and integer
indices, so replications and layers never share a generator and can run in
any order (or in parallel) with identical results.
"""
import zlib

import numpy as np


def _tag_word(tag):
    return zlib.crc32(str(tag).encode("utf-8"))


def seed_sequence(base_seed, tag, *indices):
    key = [_tag_word(tag)] + [int(i) for i in indices]
    return np.random.SeedSequence(entropy=int(base_seed) & (2**64 - 1), spawn_key=key)


def derive_rng(base_seed, tag, *indices):
    """Return an independent ``numpy.random.Generator`` for ``(base_seed, tag, *indices)``."""
    return np.random.default_rng(seed_sequence(base_seed, tag, *indices))


def derive_seed(base_seed, tag, *indices):
    """Return a 63-bit integer sub-seed (handy for storing in records)."""
    return int(seed_sequence(base_seed, tag, *indices).generate_state(1, np.uint64)[0] >> np.uint64(1))


def as_generator(rng):
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)
