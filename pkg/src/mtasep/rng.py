"""Splittable counter-based random streams.

Every Monte Carlo kernel in this package draws from a SplitMix64 stream
keyed by (seed, stream_id).  Streams for distinct (seed, stream_id) pairs
are statistically independent, and a given pair reproduces the same draw
sequence bit-for-bit on any machine and under any parallel schedule, which
is what makes replica-parallel runs byte-identical regardless of the
worker count.

The generator functions are plain uint64 arithmetic so that numba kernels
can inline them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_U64_MASK = np.uint64(0xFFFFFFFFFFFFFFFF)


@numba.njit(numba.uint64(numba.uint64), cache=True, inline="always")
def _mix64(z):
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


@numba.njit(numba.uint64(numba.uint64, numba.uint64), cache=True)
def stream_state(seed, stream_id):
    """Initial SplitMix64 state for the (seed, stream_id) stream."""
    return _mix64(_mix64(seed * _GAMMA + np.uint64(1)) + stream_id * _GAMMA)


@numba.njit(numba.uint64(numba.uint64), cache=True, inline="always")
def next_state(state):
    return state + _GAMMA


@numba.njit(numba.uint64(numba.uint64), cache=True, inline="always")
def state_output(state):
    return _mix64(state)


@numba.njit(numba.float64(numba.uint64), cache=True, inline="always")
def to_unit(u):
    # 53-bit mantissa; uniform on [0, 1)
    return (u >> np.uint64(11)) * (1.0 / 9007199254740992.0)


@dataclass(frozen=True)
class ClockStream:
    """Handle for one replica's clock randomness.

    Identical (seed, stream_id) pairs reproduce identical event sequences
    bit-for-bit.
    """

    seed: int
    stream_id: int = 0

    @property
    def state(self) -> np.uint64:
        return stream_state(np.uint64(self.seed & 0xFFFFFFFFFFFFFFFF),
                            np.uint64(self.stream_id & 0xFFFFFFFFFFFFFFFF))

    def split(self, stream_id: int) -> "ClockStream":
        """Derived stream; used to give each replica its own clocks."""
        return ClockStream(self.seed, stream_id)


class StreamRNG:
    """Python-side view of a SplitMix64 stream (for non-kernel sampling)."""

    def __init__(self, stream, stream_id: int = None):
        if not isinstance(stream, ClockStream):
            stream = ClockStream(int(stream), stream_id or 0)
        elif stream_id is not None:
            stream = stream.split(stream_id)
        self._state = np.uint64(stream.state)

    def next_u64(self) -> int:
        self._state = next_state(self._state)
        return int(state_output(self._state))

    def uniform(self) -> float:
        return to_unit(np.uint64(self.next_u64()))

    def exponential(self) -> float:
        u = self.uniform()
        return -math.log(1.0 - u)

    def randint(self, n: int) -> int:
        """Uniform integer in [0, n)."""
        return int(self.uniform() * n)
