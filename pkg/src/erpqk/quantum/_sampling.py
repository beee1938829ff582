"""Counter-based shot sampling.

A measurement record is simulated by drawing one uniform per shot from a
splitmix64 stream keyed by a 64-bit seed; a shot lands on |0...0> when its
uniform is below the exact probability. The count is therefore
Binomial(shots, p) and depends only on (p, seed, shots), never on call order.
"""
import numpy as np

from .._accel import njit, select

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
MIX1 = np.uint64(0xBF58476D1CE4E5B9)
MIX2 = np.uint64(0x94D049BB133111EB)
DOMAIN = np.uint64(0x5EED5EED5EED5EED)
S30 = np.uint64(30)
S27 = np.uint64(27)
S31 = np.uint64(31)
S11 = np.uint64(11)
TWO_M53 = 2.0 ** -53


@njit
def _mix_numba(z):
    z = (z ^ (z >> S30)) * MIX1
    z = (z ^ (z >> S27)) * MIX2
    return z ^ (z >> S31)


def mix64(z):
    """splitmix64 finalizer on uint64 scalars or arrays (wrapping arithmetic)."""
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> S30)) * MIX1
        z = (z ^ (z >> S27)) * MIX2
    return z ^ (z >> S31)


def entry_seed(seed, i, j):
    """Stable 64-bit key for Gram entry ``(i, j)`` under ``seed``."""
    if int(seed) < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    z = mix64(np.uint64(seed) ^ DOMAIN)
    z = mix64(z ^ np.asarray(i, dtype=np.uint64))
    return mix64(z ^ np.asarray(j, dtype=np.uint64))


@njit
def count_zero_numba(probs, seeds, shots):
    out = np.empty(probs.shape[0], dtype=np.int64)
    for e in range(probs.shape[0]):
        key = seeds[e]
        p = probs[e]
        count = 0
        for s in range(shots):
            z = _mix_numba(key + np.uint64(s + 1) * GOLDEN)
            if np.float64(z >> S11) * TWO_M53 < p:
                count += 1
        out[e] = count
    return out


def count_zero_numpy(probs, seeds, shots, block=512):
    probs = np.asarray(probs, dtype=float)
    seeds = np.asarray(seeds, dtype=np.uint64)
    out = np.empty(len(probs), dtype=np.int64)
    with np.errstate(over="ignore"):
        steps = np.arange(1, shots + 1, dtype=np.uint64) * GOLDEN
        for lo in range(0, len(probs), block):
            z = mix64(seeds[lo:lo + block, None] + steps[None, :])
            u = (z >> S11).astype(np.float64) * TWO_M53
            out[lo:lo + block] = np.count_nonzero(u < probs[lo:lo + block, None], axis=1)
    return out


count_zero = select(count_zero_numba, count_zero_numpy)
