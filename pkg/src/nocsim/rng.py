"""Deterministic 64-bit RNG (splitmix64).

splitmix64 is fixed so that identical seeds give bit-identical streams on
every platform.  The generator state is a single uint64; ``rng_below``
draws an unbiased integer in [0, n) by taking the top ``ceil(log2 n)``
bits of a draw and rejecting values >= n.  ``n == 1`` consumes no draw.

Kernel code mutates a one-element uint64 array in place; the ``Rng``
class wraps the same functions for API-level use.
"""

from __future__ import annotations

import numpy as np
from numba import njit

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)


@njit(cache=True)
def splitmix64(state):
    """Advance one step: returns (new_state, output), both uint64."""
    state = state + _GAMMA
    z = state
    z = (z ^ (z >> _S30)) * _MIX1
    z = (z ^ (z >> _S27)) * _MIX2
    z = z ^ (z >> _S31)
    return state, z


@njit(cache=True)
def rng_next(rs):
    """Draw the next uint64 from the in-place state array ``rs``."""
    s, z = splitmix64(rs[0])
    rs[0] = s
    return z


@njit(cache=True)
def rng_below(rs, n):
    """Unbiased draw in [0, n) via top-bits rejection sampling.

    n must be >= 1.  n == 1 returns 0 without consuming a draw.
    """
    if n <= 1:
        return 0
    bits = 0
    m = n - 1
    while m > 0:
        bits += 1
        m >>= 1
    shift = np.uint64(64 - bits)
    un = np.uint64(n)
    while True:
        z = rng_next(rs)
        r = z >> shift
        if r < un:
            return np.int64(r)


@njit(cache=True)
def rng_coin(rs):
    """Single fair bit (top bit of a draw)."""
    return np.int64(rng_next(rs) >> np.uint64(63))


@njit(cache=True)
def mix64(x):
    """Stateless scramble of a uint64 (splitmix64 finalizer).

    Used for the event-log digest.
    """
    z = x
    z = (z ^ (z >> _S30)) * _MIX1
    z = (z ^ (z >> _S27)) * _MIX2
    return z ^ (z >> _S31)


class Rng:
    """Seeded splitmix64 stream usable from plain Python."""

    def __init__(self, seed: int):
        self._state = np.zeros(1, dtype=np.uint64)
        self._state[0] = np.uint64(seed & 0xFFFFFFFFFFFFFFFF)

    @property
    def state(self) -> int:
        return int(self._state[0])

    def next_u64(self) -> int:
        return int(rng_next(self._state))

    def below(self, n: int) -> int:
        if n < 1:
            raise ValueError("rng_below requires n >= 1")
        return int(rng_below(self._state, n))

    def raw(self) -> np.ndarray:
        """The in-place state array handed to kernels."""
        return self._state
