"""Counter-based uniform streams for reproducible parallel simulation.

Replicate ``i`` of a run seeded with ``seed`` owns the SplitMix64 sequence
started at

    key(seed, i) = mix64(mix64(seed) + (i + 1) * REPLICATE_STRIDE)

and its ``j``-th uniform (j = 0, 1, ...) is

    u(seed, i, j) = (mix64(key + (j + 1) * GOLDEN_GAMMA) >> 11) * 2**-53.

Every value is a pure function of (seed, i, j), so the order in which
replicates are scheduled cannot change any result.  The constants and the
mixing function are frozen; ``tests/test_streams.py`` pins golden values.
"""
from __future__ import annotations

import numpy as np
from numba import njit

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
REPLICATE_STRIDE = 0xD1B54A32D192ED03
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB

_U_GAMMA = np.uint64(GOLDEN_GAMMA)
_U_STRIDE = np.uint64(REPLICATE_STRIDE)
_U_M1 = np.uint64(_M1)
_U_M2 = np.uint64(_M2)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_ONE = np.uint64(1)
_INV53 = 1.0 / 9007199254740992.0


def mix64_py(z: int) -> int:
    """Reference (pure Python) SplitMix64 finalizer."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def replicate_key_py(seed: int, i: int) -> int:
    return mix64_py((mix64_py(seed) + (i + 1) * REPLICATE_STRIDE) & MASK64)


def uniform_py(seed: int, i: int, j: int) -> float:
    key = replicate_key_py(seed, i)
    return (mix64_py((key + (j + 1) * GOLDEN_GAMMA) & MASK64) >> 11) * 2.0**-53


@njit(cache=True, nogil=True)
def mix64(z):
    z = (z ^ (z >> _S30)) * _U_M1
    z = (z ^ (z >> _S27)) * _U_M2
    return z ^ (z >> _S31)


@njit(cache=True, nogil=True)
def replicate_key(seed, i):
    return mix64(mix64(seed) + (np.uint64(i) + _ONE) * _U_STRIDE)


@njit(cache=True, nogil=True)
def fill_uniforms(key, start, out):
    """out[j] = j-th uniform of the stream, counting from position ``start``."""
    for j in range(out.shape[0]):
        ctr = np.uint64(start + j) + _ONE
        out[j] = np.float64(mix64(key + ctr * _U_GAMMA) >> _S11) * _INV53


class ReplicateStream:
    """Uniform source for one replicate; exposes ``random(size)`` like numpy."""

    def __init__(self, seed: int, replicate: int = 0):
        if not 0 <= seed <= MASK64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        self.seed = seed
        self.replicate = replicate
        self._key = np.uint64(replicate_key(np.uint64(seed), np.int64(replicate)))
        self._pos = 0

    def random(self, size=None):
        m = 1 if size is None else int(size)
        out = np.empty(m, dtype=np.float64)
        fill_uniforms(self._key, self._pos, out)
        self._pos += m
        return float(out[0]) if size is None else out
