"""Counter-based uniform streams.

Every Monte-Carlo trial draws from its own stream, addressed by
``(seed, trial)``.  Slot ``j`` of trial ``t`` is

    key_t = mix64(mix64(seed) ^ (t * GOLDEN))
    u[t, j] = (mix64(key_t + (j + 1) * GAMMA) >> 11) * 2**-53

where ``mix64`` is the splitmix64 finalizer.  Because a value depends only
on its address, results do not depend on chunking, worker count or
execution order.
"""

from __future__ import annotations

import numpy as np

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
GAMMA = np.uint64(0xBF58476D1CE4E5B9)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_MASK64 = (1 << 64) - 1


def mix64(z: np.ndarray) -> np.ndarray:
    """splitmix64 finalizer on a uint64 array (wrapping arithmetic)."""
    z = np.asarray(z, dtype=np.uint64)
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def stream_keys(seed: int, trials: np.ndarray) -> np.ndarray:
    base = mix64(np.array([seed & _MASK64], dtype=np.uint64))[0]
    t = np.asarray(trials, dtype=np.uint64)
    return mix64(base ^ (t * GOLDEN))


def trial_uniforms(seed: int, start: int, stop: int, width: int) -> np.ndarray:
    """Uniforms in [0, 1) for trials ``start..stop-1``, ``width`` slots each."""
    keys = stream_keys(seed, np.arange(start, stop, dtype=np.uint64))
    slots = (np.arange(1, width + 1, dtype=np.uint64) * GAMMA)[None, :]
    bits = mix64(keys[:, None] + slots) >> np.uint64(11)
    return bits.astype(np.float64) * (1.0 / 9007199254740992.0)


def seed_from(rng) -> int:
    """Accept an int seed or a numpy Generator; return a 63-bit seed."""
    if rng is None:
        return 0
    if isinstance(rng, (int, np.integer)):
        return int(rng)
    return int(rng.integers(0, 2**63 - 1))


def uniforms_from(rng, width: int) -> np.ndarray:
    """One trial's worth of uniforms: from a Generator, or stream 0 of an int seed."""
    if isinstance(rng, (int, np.integer)) or rng is None:
        return trial_uniforms(seed_from(rng), 0, 1, width)[0]
    return rng.random(width)


def derive_seed(seed: int, *labels: int) -> int:
    """Child seed for a labelled sub-stream (e.g. one per buyer type)."""
    z = seed & _MASK64
    for lab in labels:
        salt = ((lab & _MASK64) * int(GOLDEN) + int(GAMMA)) & _MASK64
        z = int(mix64(np.array([z ^ salt], dtype=np.uint64))[0])
    return z >> 1
