"""Counter-based random streams.

Every draw is a pure function of ``(seed, trajectory, draw)``: the global
counter ``trajectory * 2**32 + draw`` indexes a SplitMix64 sequence keyed by
the seed. No generator state is carried between trajectories, so any
partition of the trajectory range across shards or threads reproduces the
same numbers.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S32 = np.uint64(32)
_DRAW_BITS = 32
_U32 = np.uint64(0xFFFFFFFF)


def _mix(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


def _mix_int(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


class CounterStream:
    """Keyed SplitMix64 addressed by (trajectory, draw)."""

    def __init__(self, seed: int):
        self.seed = int(seed)
        self._key = np.uint64(_mix_int(self.seed & _MASK))

    def bits(self, trajectories: np.ndarray, draw: int) -> np.ndarray:
        """64 random bits for each trajectory index at draw ``draw``."""
        if not 0 <= draw < (1 << _DRAW_BITS):
            raise ValueError(f"draw index out of range: {draw}")
        t = np.asarray(trajectories, dtype=np.uint64)
        counter = (t << np.uint64(_DRAW_BITS)) | np.uint64(draw)
        return _mix(self._key + counter * np.uint64(_GOLDEN))

    def uniform_pair(self, trajectories: np.ndarray, draw: int) -> tuple[np.ndarray, np.ndarray]:
        """Two independent 32-bit uniforms on [0, 1) per trajectory from one draw."""
        z = self.bits(trajectories, draw)
        hi = (z >> _S32).astype(np.float64)
        lo = (z & _U32).astype(np.float64)
        return hi * 2.0**-32, lo * 2.0**-32
