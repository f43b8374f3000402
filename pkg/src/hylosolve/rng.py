"""Deterministic random streams based on the splitmix64 generator.

Every random draw in the package flows from a single 64-bit seed through
named streams (stream id = FNV-1a hash of the stage name mixed into the
seed), so identical configs reproduce identical outputs.  The generator
itself is pure 64-bit integer arithmetic; derived uniforms use only
shifts and multiplies, so the raw stream is bit-identical across
platforms.  Values that pass through an FFT afterwards inherit the FFT
implementation's roundoff and are only reproducible per-platform.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def fnv1a64(text: str) -> int:
    """64-bit FNV-1a hash of a UTF-8 string."""
    h = _FNV_OFFSET
    for byte in text.encode("utf-8"):
        h ^= byte
        h = (h * _FNV_PRIME) & _MASK64
    return h


def _mix(z: int) -> int:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 & _MASK64
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & _MASK64
    return z ^ (z >> 31)


class SplitMix64:
    """splitmix64 stream: state advances by the golden gamma per draw.

    The k-th output is mix(seed + (k+1)*gamma), which lets blocks of
    outputs be produced vectorized without changing the stream.
    """

    def __init__(self, seed: int):
        self._seed = seed & _MASK64
        self._count = 0

    def next_u64(self) -> int:
        self._count += 1
        return _mix((self._seed + self._count * _GAMMA) & _MASK64)

    def next_block_u64(self, n: int) -> np.ndarray:
        """n further outputs of the same stream, as uint64."""
        idx = np.arange(self._count + 1, self._count + n + 1, dtype=np.uint64)
        self._count += n
        z = (np.uint64(self._seed) + idx * np.uint64(_GAMMA))
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        return z ^ (z >> np.uint64(31))

    def uniform(self, n: int | None = None):
        """Uniforms in [0, 1) with 53-bit mantissas (scalar if n is None)."""
        if n is None:
            return (self.next_u64() >> 11) * 2.0**-53
        block = self.next_block_u64(n) >> np.uint64(11)
        return block.astype(np.float64) * 2.0**-53

    def symmetric(self, n: int) -> np.ndarray:
        """Uniforms in [-1, 1)."""
        return 2.0 * self.uniform(n) - 1.0

    def integers(self, n: int, bound: int) -> np.ndarray:
        """n integers in [0, bound) by 64-bit modular reduction."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        return (self.next_block_u64(n) % np.uint64(bound)).astype(np.int64)

    def split(self, stream: str) -> "SplitMix64":
        """Independent child stream identified by name."""
        return SplitMix64(_mix((self._seed ^ fnv1a64(stream)) & _MASK64))
