"""Counter-based random stream (SplitMix64 finalizer).

A trial stream is identified by ``key = stream_key(seed, trial)``; the i-th
draw of that stream is ``uniform(key, i)``.  Any draw can be recomputed
independently, so trials are reproducible regardless of scheduling.
"""
import numpy as np

from .._jit import USE_NUMBA, kernel

GAMMA = 0x9E3779B97F4A7C15
_C1 = 0xBF58476D1CE4E5B9
_C2 = 0x94D049BB133111EB
_SALT = 0x5851F42D4C957F2D
_MASK = (1 << 64) - 1
_INV53 = 1.0 / 9007199254740992.0

if USE_NUMBA:
    _G = np.uint64(GAMMA)
    _U1 = np.uint64(_C1)
    _U2 = np.uint64(_C2)
    _US = np.uint64(_SALT)
    _S11 = np.uint64(11)
    _S27 = np.uint64(27)
    _S30 = np.uint64(30)
    _S31 = np.uint64(31)

    @kernel
    def mix64(z):
        z = (z ^ (z >> _S30)) * _U1
        z = (z ^ (z >> _S27)) * _U2
        return z ^ (z >> _S31)

    @kernel
    def stream_key(seed, index):
        k = mix64(np.uint64(seed) ^ _US)
        return mix64(k + np.uint64(index) * _G)

    @kernel
    def subkey(key, index):
        return mix64(np.uint64(key) ^ mix64(np.uint64(index) * _G + _US))

    @kernel
    def uniform(key, ctr):
        z = mix64(np.uint64(key) + np.uint64(ctr + 1) * _G)
        return np.float64(z >> _S11) * _INV53

else:

    def mix64(z):
        z = ((z ^ (z >> 30)) * _C1) & _MASK
        z = ((z ^ (z >> 27)) * _C2) & _MASK
        return z ^ (z >> 31)

    def stream_key(seed, index):
        k = mix64((int(seed) & _MASK) ^ _SALT)
        return mix64((k + (int(index) & _MASK) * GAMMA) & _MASK)

    def subkey(key, index):
        return mix64(key ^ mix64(((int(index) & _MASK) * GAMMA + _SALT) & _MASK))

    def uniform(key, ctr):
        z = mix64((key + ((int(ctr) + 1) & _MASK) * GAMMA) & _MASK)
        return float(z >> 11) * _INV53


@kernel
def poisson(key, ctr, lam):
    """Poisson(lam) by inversion; consumes exactly one draw."""
    u = uniform(key, ctr)
    k = 0
    pk = np.exp(-lam)
    acc = pk
    while u > acc and pk > 0.0:
        k += 1
        pk *= lam / k
        acc += pk
    return k


def as_key(k):
    """Normalize a key returned to Python so it can be passed back in (numba
    hands uint64 back as a plain int, which would overflow int64 typing)."""
    return np.uint64(k) if USE_NUMBA else int(k)
