"""Stateless counter-based uniform generator.

Every random quantity in the toolkit is a pure function of a 64-bit seed and
a small tuple of integer keys (stream id, vertex index, draw counter, ...).
That makes samples reproducible bit-for-bit, safe to evaluate from any number
of threads in any order, and stable under window extension: a vertex keeps
its mark, its gap and its pair uniforms when the window around it grows.

The mixer is the splitmix64 finalizer applied to a running state that absorbs
one key word at a time. It is not cryptographic; it is a simulation-grade
avalanche hash (the same construction passes the uniformity and independence
checks in the test suite).
"""

from __future__ import annotations

import numpy as np

# Stream ids: domain separation between the different uses of the hash.
STREAM_MARK = 1
STREAM_GAP_RIGHT = 2
STREAM_GAP_LEFT = 3
STREAM_RETAIN = 4
STREAM_PAIR = 5
STREAM_WALK = 6
STREAM_LOCATION = 7
STREAM_DERIVE = 8

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_U64 = np.uint64
_TWO53_INV = 2.0**-53


def _finalize(z):
    """splitmix64 finalizer; accepts uint64 scalars or arrays."""
    z = (z ^ (z >> _U64(30))) * _M1
    z = (z ^ (z >> _U64(27))) * _M2
    return z ^ (z >> _U64(31))


def _as_u64(x):
    """Map python ints / signed arrays to uint64 with two's-complement wrap."""
    if isinstance(x, np.ndarray):
        return x.astype(np.int64, copy=False).view(np.uint64) if x.dtype.kind == "i" else x.astype(np.uint64, copy=False)
    return np.int64(int(x)).view(np.uint64) if int(x) < 0 else _U64(int(x))


def mix(seed, *words):
    """Hash (seed, words...) to a single uint64.

    Scalar words only; returns a python int in [0, 2**64).
    """
    with np.errstate(over="ignore"):
        h = _finalize(_as_u64(seed) ^ _GOLDEN)
        for w in words:
            h = _finalize((h + _GOLDEN) ^ _as_u64(w))
    return int(h)


def mix_array(seed, stream, idx, counter=None):
    """Vectorized mix over an integer array `idx` (and optional `counter` array)."""
    with np.errstate(over="ignore"):
        h = _finalize(_as_u64(seed) ^ _GOLDEN)
        h = _finalize((h + _GOLDEN) ^ _as_u64(stream))
        out = _finalize((h + _GOLDEN) ^ _as_u64(np.asarray(idx)))
        if counter is not None:
            out = _finalize((out + _GOLDEN) ^ _as_u64(np.asarray(counter)))
    return out


def uniform_open(seed, *words):
    """One uniform draw in the open interval (0, 1), keyed by (seed, words...)."""
    h = _U64(mix(seed, *words))
    return (float(h >> _U64(11)) + 0.5) * _TWO53_INV


def uniform_open_array(seed, stream, idx, counter=None):
    """Vectorized open-interval uniforms keyed by (seed, stream, idx[, counter]).

    Values are (k + 0.5) / 2**53 for k in [0, 2**53), so exactly 0.0 and 1.0
    can never occur. Marks rely on this: the model needs marks in (0, 1).
    """
    h = mix_array(seed, stream, idx, counter)
    return ((h >> _U64(11)).astype(np.float64) + 0.5) * _TWO53_INV


def pair_uniform(seed, i, j):
    """Symmetric per-pair uniform: keyed by (seed, min(i,j), max(i,j)).

    The naive edge sampler thresholds this value, which is what makes the
    beta-monotone coupling exact: the same uniform is compared against a
    larger probability when beta grows, so edge sets are nested.
    """
    from .errors import DomainError

    if i == j:
        raise DomainError(f"pair uniform needs two distinct vertices, got index {i} twice")
    a, b = (i, j) if i <= j else (j, i)
    return uniform_open(seed, STREAM_PAIR, a, b)


def pair_uniform_array(seed, i, j):
    """Vectorized pair_uniform over index arrays (no identical pairs allowed)."""
    from .errors import DomainError

    i = np.asarray(i, dtype=np.int64)
    j = np.asarray(j, dtype=np.int64)
    if np.any(i == j):
        raise DomainError("pair uniform needs distinct vertices in every pair")
    a = np.minimum(i, j)
    b = np.maximum(i, j)
    with np.errstate(over="ignore"):
        h = _finalize(_as_u64(seed) ^ _GOLDEN)
        h = _finalize((h + _GOLDEN) ^ _U64(STREAM_PAIR))
        out = _finalize((_U64(h) + _GOLDEN) ^ a.view(np.uint64))
        out = _finalize((out + _GOLDEN) ^ b.view(np.uint64))
    return ((out >> _U64(11)).astype(np.float64) + 0.5) * _TWO53_INV


def derive_seed(master_seed, *indices):
    """Splittable child seed for (grid point, replica, ...) work items."""
    return mix(master_seed, STREAM_DERIVE, *indices)
