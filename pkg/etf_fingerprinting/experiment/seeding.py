"""
Seed derivation for Monte Carlo trials.

Every trial draws from its own numpy Generator seeded with

    h0 = splitmix64(master_seed)
    h1 = splitmix64(h0 ^ K)
    seed = splitmix64(h1 ^ trial)

so a trial's coalition and noise depend only on (master_seed, K, trial),
never on how trials are batched or split across worker processes.
"""

import numpy as np

from etf_fingerprinting.core.validators import require_int

MASK64 = (1 << 64) - 1

_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def splitmix64(x):
    """One splitmix64 output step for state x (64-bit Python int arithmetic)."""
    z = (x + _GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & MASK64
    return z ^ (z >> 31)


def derive_trial_seed(master_seed, k_value, trial):
    h = splitmix64(master_seed & MASK64)
    h = splitmix64(h ^ (k_value & MASK64))
    return splitmix64(h ^ (trial & MASK64))


def trial_generator(master_seed, k_value, trial):
    return np.random.default_rng(derive_trial_seed(master_seed, k_value, trial))


def resolve_master_seed(seed=None):
    """Validate a 64-bit seed, or draw one from OS entropy when None."""
    if seed is None:
        return int(np.random.SeedSequence().entropy) & MASK64
    return require_int(seed, "master_seed", minimum=0, maximum=MASK64)
