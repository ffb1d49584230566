"""Deterministic random-stream management.

Every stochastic routine in the package takes a master seed and derives
its streams through ``SeedSequence`` spawn keys, so a run is reproducible
bit-for-bit from the master seed alone.  Path-level kernels consume raw
64-bit seeds (one per path) produced by :func:`path_seeds`; Python-level
sampling uses :func:`make_rng`.
"""

from __future__ import annotations

import numpy as np

# Stream namespaces.  Fixed small integers so spawn keys are stable.
DRAWS = 0        # initial-condition draws (importance sampling)
PATHS = 1        # per-path simulation seeds
BOUNDARY = 2     # support-boundary quadrature paths
DATA = 3         # data generation (multinomial / fountain)
PILOT = 4        # pilot runs (burn-in adequacy checks)
REFERENCE = 5    # high-budget oracle reference runs
STEP = 6         # per-descent-step namespace
REPLICATE = 7    # replicate-level experiment namespace


def seed_sequence(master_seed: int, *key: int) -> np.random.SeedSequence:
    """SeedSequence for the stream identified by ``key`` under ``master_seed``."""
    return np.random.SeedSequence(entropy=master_seed, spawn_key=tuple(key))


def make_rng(master_seed: int, *key: int) -> np.random.Generator:
    """PCG64 generator for the given stream."""
    return np.random.Generator(np.random.PCG64(seed_sequence(master_seed, *key)))


def path_seeds(master_seed: int, *key: int, n: int) -> np.ndarray:
    """``n`` well-mixed uint64 seeds, one per simulated path.

    Drawn from a PCG64 stream keyed like :func:`make_rng` but under a
    reserved final key component, so path seeds never collide with
    Python-level sampling streams.
    """
    rng = make_rng(master_seed, *key, 0x5EED)
    return rng.integers(0, 2**64, size=n, dtype=np.uint64)
