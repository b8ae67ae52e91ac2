"""Pinned random streams.

Every random quantity in the toolbox is drawn from a numpy ``PCG64`` generator whose
``SeedSequence`` is keyed by the base seed and an index path, so results never depend on
the order or the process in which work units run.
"""
import numpy as np

MAX_SEED = 2**64 - 1


def check_seed(seed):
    seed = int(seed)
    assert 0 <= seed <= MAX_SEED, f"seed must be a 64-bit unsigned integer, got {seed}"
    return seed


def derive_seed_sequence(seed, *path):
    return np.random.SeedSequence(check_seed(seed), spawn_key=tuple(int(p) for p in path))


def derive_rng(seed, *path):
    return np.random.Generator(np.random.PCG64(derive_seed_sequence(seed, *path)))


def derive_seed(seed, *path):
    """Collapse a derived stream back into a plain 64-bit seed for nested work units."""
    return int(derive_seed_sequence(seed, *path).generate_state(1, dtype=np.uint64)[0])
