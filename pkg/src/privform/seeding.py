"""Deterministic seed splitting.

Every random stream in the package derives from one top-level integer seed
through ``numpy.random.SeedSequence`` spawn keys, so any artifact can be
reproduced from its config alone.  The key layout is:

    (DOMAIN_SIMULATION, trial, agent_key)   per-agent noise inside one trial
    (DOMAIN_CODESIGN, start)                multi-start jitter in the optimizer
    (DOMAIN_GENERIC, *key)                  everything else (tests, tooling)
"""

from __future__ import annotations

import numpy as np

DOMAIN_SIMULATION = 0
DOMAIN_CODESIGN = 1
DOMAIN_GENERIC = 2


def seed_sequence(seed: int, *key: int) -> np.random.SeedSequence:
    """Child SeedSequence of ``seed`` at the given spawn key."""
    return np.random.SeedSequence(entropy=seed, spawn_key=tuple(key))


def generator(seed: int, *key: int) -> np.random.Generator:
    """PCG64 generator seeded at the given spawn key."""
    return np.random.Generator(np.random.PCG64(seed_sequence(seed, *key)))
