"""Counter-based random numbers.

Every draw is a pure function of ``(key, stream, counter)``, so a trajectory's
randomness does not depend on how trajectories are chunked or scheduled.
The mixer is SplitMix64's finalizer applied to a keyed counter.
"""

from __future__ import annotations

import hashlib

import numpy as np

__all__ = ["derive_key", "uniforms", "bits"]

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_STREAM_MUL = np.uint64(0xD1B54A32D192ED03)
_MASK = (1 << 64) - 1


def _mix(z: np.ndarray) -> np.ndarray:
    z = z ^ (z >> np.uint64(30))
    z = z * _M1
    z = z ^ (z >> np.uint64(27))
    z = z * _M2
    return z ^ (z >> np.uint64(31))


def derive_key(seed: int, *labels) -> int:
    """Deterministically derive a 64-bit key from a seed and labels."""
    h = hashlib.blake2b(digest_size=8)
    h.update(int(seed & _MASK).to_bytes(8, "little"))
    for lab in labels:
        h.update(b"\x00")
        h.update(str(lab).encode())
    return int.from_bytes(h.digest(), "little")


def bits(key: int, stream, counter) -> np.ndarray:
    """64 random bits for each (stream, counter) pair (broadcasting)."""
    with np.errstate(over="ignore"):
        s = np.asarray(stream, dtype=np.uint64)
        c = np.asarray(counter, dtype=np.uint64)
        k = np.uint64(key & _MASK)
        z = _mix(k ^ (s * _STREAM_MUL))
        z = _mix(z + (c + np.uint64(1)) * _GOLDEN)
    return z


def uniforms(key: int, stream, counter) -> np.ndarray:
    """Uniform doubles in [0, 1) from the top 53 bits."""
    return (bits(key, stream, counter) >> np.uint64(11)).astype(np.float64) * (1.0 / 2**53)
