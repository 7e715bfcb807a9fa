"""Counter-based randomness: every trial's stream is a pure function of (seed, trial).

Results therefore do not depend on how trials are split across workers or on
the order in which they run.
"""

from __future__ import annotations

import hashlib

import numpy as np

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


def derive_seed(seed: int, *keys: int | str) -> int:
    """64-bit sub-seed hashed from ``seed`` and any number of integer/string keys."""
    h = hashlib.blake2b(digest_size=8)
    h.update(str(seed).encode())
    for k in keys:
        h.update(b"\x00" + str(k).encode())
    return int.from_bytes(h.digest(), "little")


def trial_generator(seed: int, trial: int, *keys: int | str) -> np.random.Generator:
    """Philox-backed generator for one trial."""
    return np.random.Generator(np.random.Philox(key=derive_seed(seed, trial, *keys)))


def _mix64(x: np.ndarray) -> np.ndarray:
    # splitmix64 finaliser; uint64 arithmetic wraps modulo 2**64.
    x = (x ^ (x >> np.uint64(30))) * _M1
    x = (x ^ (x >> np.uint64(27))) * _M2
    return x ^ (x >> np.uint64(31))


def trial_uniforms(seed: int, trials: np.ndarray, lane: int, width: int) -> np.ndarray:
    """Uniform [0, 1) floats of shape ``(len(trials), width)``.

    Entry ``[j, v]`` depends only on ``(seed, trials[j], lane, v)``.
    """
    key = np.uint64(derive_seed(seed, "lane", lane))
    with np.errstate(over="ignore"):
        t = np.asarray(trials, dtype=np.uint64)[:, None]
        row = _mix64(key ^ _mix64((t + np.uint64(1)) * _GAMMA))
        v = np.arange(1, width + 1, dtype=np.uint64)[None, :]
        x = _mix64(row + v * _GAMMA)
    return (x >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))
