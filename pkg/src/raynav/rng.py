"""Portable seeded random source.

World generation and every benchmark stream must be bit-reproducible across
runs and platforms, so randomness comes from SplitMix64 (Steele et al.,
"Fast splittable pseudorandom number generators") rather than a library
generator whose stream may change between versions. The state sequence is
``seed + k * GAMMA (mod 2^64)`` and the output is a fixed 64-bit mix of the
state, which also makes batch generation a plain array computation.

Doubles are built from the top 53 bits (``(x >> 11) * 2^-53``), normals by
Box-Muller on two uniforms. Sub-streams are derived by hashing a label path
with SHA-256, so independently seeded stages never share a stream.
"""

from __future__ import annotations

import hashlib

import numpy as np

_GAMMA = 0x9E3779B97F4A7C15
_MASK = (1 << 64) - 1
_INV_2_53 = 1.0 / (1 << 53)


def _mix(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def derive_seed(master: int, *labels) -> int:
    """Stable 64-bit sub-stream seed from a master seed and a label path."""
    h = hashlib.sha256()
    h.update(str(int(master)).encode())
    for lab in labels:
        h.update(b"/")
        h.update(str(lab).encode())
    return int.from_bytes(h.digest()[:8], "little")


class SplitMix64:
    """Deterministic 64-bit generator; one instance per logical stream."""

    def __init__(self, seed: int):
        self.state = int(seed) & _MASK

    def next_u64(self) -> int:
        self.state = (self.state + _GAMMA) & _MASK
        return _mix(self.state)

    def u64_array(self, n: int) -> np.ndarray:
        """n outputs, identical to n successive next_u64 calls."""
        ks = np.arange(1, n + 1, dtype=np.uint64)
        z = (np.uint64(self.state) + ks * np.uint64(_GAMMA)).astype(np.uint64)
        self.state = (self.state + n * _GAMMA) & _MASK
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        return z ^ (z >> np.uint64(31))

    def uniform(self, low: float = 0.0, high: float = 1.0) -> float:
        u = (self.next_u64() >> 11) * _INV_2_53
        return low + u * (high - low)

    def uniform_array(self, n: int, low: float = 0.0, high: float = 1.0) -> np.ndarray:
        u = (self.u64_array(n) >> np.uint64(11)).astype(np.float64) * _INV_2_53
        return low + u * (high - low)

    def integer(self, n: int) -> int:
        """Uniform integer in [0, n) by 53-bit double scaling."""
        return int(self.uniform() * n)

    def normal(self) -> float:
        return float(self.normal_array(1)[0])

    def normal_array(self, n: int) -> np.ndarray:
        """Standard normals via Box-Muller; consumes 2n uniforms."""
        u = self.uniform_array(2 * n)
        u1 = 1.0 - u[:n]  # (0, 1]: keeps log() finite
        u2 = u[n:]
        return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)

    def spawn(self, *labels) -> "SplitMix64":
        """Independent sub-stream named by the label path."""
        return SplitMix64(derive_seed(self.state, *labels))
