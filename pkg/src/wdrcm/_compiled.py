"""Numba inner loops for the samplers and component labelling.

The hash chain here mirrors rng.py bit for bit (same finalizer, same
stream constants), so compiled and pure-python draws agree exactly.
"""
import math

import numpy as np
from numba import njit

from . import rng

_G = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_TWO53_INV = 2.0 ** -53
_TINY_Q = 2.0 ** -53

_STREAM_PAIR = np.uint64(rng.STREAM_PAIR)
_STREAM_WALK = np.uint64(rng.STREAM_WALK)
_STREAM_DERIVE = np.uint64(rng.STREAM_DERIVE)


@njit(cache=True, inline="always")
def _fin(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@njit(cache=True, inline="always")
def _u01(h):
    return (np.float64(h >> _S11) + 0.5) * _TWO53_INV


@njit(cache=True, inline="always")
def _derive(master, word):
    h = _fin(master ^ _G)
    h = _fin((h + _G) ^ _STREAM_DERIVE)
    return _fin((h + _G) ^ word)


@njit(cache=True, inline="always")
def _pair_u(seed, a, b):
    # a < b by caller; keys match rng.pair_uniform exactly
    h = _fin(seed ^ _G)
    h = _fin((h + _G) ^ _STREAM_PAIR)
    h = _fin((h + _G) ^ a)
    h = _fin((h + _G) ^ b)
    return _u01(h)


@njit(cache=True, inline="always")
def _walk_u(seed, vkey, layer, counter):
    h = _fin(seed ^ _G)
    h = _fin((h + _G) ^ _STREAM_WALK)
    h = _fin((h + _G) ^ vkey)
    h = _fin((h + _G) ^ layer)
    h = _fin((h + _G) ^ counter)
    return _u01(h)


@njit(cache=True, inline="always")
def _kernel_g(code, gamma, s, t):
    if code == 0:
        return 1.0
    if code == 1:
        return 1.0 / (s ** (-gamma) + t ** (-gamma))
    if code == 2:
        return min(s, t) ** gamma
    if code == 3:
        return (s * t) ** gamma
    mn = min(s, t)
    mx = max(s, t)
    return mn ** gamma * mx ** (1.0 - gamma)


@njit(cache=True, inline="always")
def _profile_rho(code, delta, cap, z):
    if code == 1:
        # 1 - exp(-z^-delta); z**-delta may overflow to inf, expm1(-inf) = -1
        return -math.expm1(-(z ** (-delta)))
    if z <= 1.0:
        p = 1.0
    else:
        p = z ** (-delta)
    if code == 2:
        return cap * p
    return p


@njit(cache=True)
def walk_edges(x, t, layer_of, order, layer_start, g_env, key, sources, cut_pos,
               kcode, gamma, pcode, delta, cap, beta, seed):
    """Layered skip-ahead walk; returns (E,2) int64 position pairs, first < second.

    order groups positions by (layer, position); within a layer positions are
    ascending, so distance from any source to successive candidates grows and
    the envelope computed at the current candidate bounds every later one.
    cut_pos < 0 walks rightward neighbours only (full graph, each pair once);
    cut_pos >= 0 restricts candidates to positions >= cut_pos (bipartite mode).
    """
    n_layers = layer_start.shape[0] - 1
    cap_edges = 4096
    buf = np.empty((cap_edges, 2), dtype=np.int64)
    m = 0
    for si in range(sources.shape[0]):
        pv = sources[si]
        xv = x[pv]
        tv = t[pv]
        av = layer_of[pv]
        vkey = np.uint64(key[pv])  # two's-complement wrap for negative indices
        mincand = pv + 1
        if cut_pos >= 0 and cut_pos > mincand:
            mincand = cut_pos
        for b in range(n_layers):
            s0 = layer_start[b]
            s1 = layer_start[b + 1]
            if s0 == s1:
                continue
            lo = s0
            hi = s1
            while lo < hi:
                mid = (lo + hi) >> 1
                if order[mid] < mincand:
                    lo = mid + 1
                else:
                    hi = mid
            i = lo
            if i >= s1:
                continue
            ge = g_env[av, b]
            bkey = np.uint64(b)
            ctr = np.uint64(0)
            while i < s1:
                w = order[i]
                d = x[w] - xv
                q = _profile_rho(pcode, delta, cap, ge * d / beta)
                if q < _TINY_Q:
                    break
                if q >= 1.0:
                    p = _profile_rho(pcode, delta, cap,
                                     _kernel_g(kcode, gamma, tv, t[w]) * d / beta)
                    u = _walk_u(seed, vkey, bkey, ctr)
                    ctr += np.uint64(1)
                    if u <= p:
                        if m == buf.shape[0]:
                            grown = np.empty((2 * buf.shape[0], 2), dtype=np.int64)
                            grown[:m] = buf
                            buf = grown
                        buf[m, 0] = pv
                        buf[m, 1] = w
                        m += 1
                    i += 1
                    continue
                u1 = _walk_u(seed, vkey, bkey, ctr)
                ctr += np.uint64(1)
                skip = np.int64(math.floor(math.log(u1) / math.log1p(-q)))
                i += skip
                if i >= s1:
                    break
                w = order[i]
                d = x[w] - xv
                p = _profile_rho(pcode, delta, cap,
                                 _kernel_g(kcode, gamma, tv, t[w]) * d / beta)
                u2 = _walk_u(seed, vkey, bkey, ctr)
                ctr += np.uint64(1)
                if u2 * q <= p:
                    if m == buf.shape[0]:
                        grown = np.empty((2 * buf.shape[0], 2), dtype=np.int64)
                        grown[:m] = buf
                        buf = grown
                    buf[m, 0] = pv
                    buf[m, 1] = w
                    m += 1
                i += 1
    return buf[:m].copy()


@njit(cache=True)
def walk_count_pairs(x, t, layer_of, order, layer_start, g_env, key,
                     kcode, gamma, pcode, delta, cap, beta,
                     master_seed, replicas, n, counts):
    """Accumulate per-pair acceptance counts of the layered walk over replicas."""
    sources = np.arange(x.shape[0], dtype=np.int64)
    for r in range(replicas):
        seed_r = _derive(master_seed, np.uint64(r))
        edges = walk_edges(x, t, layer_of, order, layer_start, g_env, key,
                           sources, np.int64(-1), kcode, gamma, pcode, delta,
                           cap, beta, seed_r)
        for e in range(edges.shape[0]):
            counts[edges[e, 0] * n + edges[e, 1]] += 1


@njit(cache=True)
def naive_count_pairs(ka, kb, probs, master_seed, replicas, counts):
    """Naive-sampler per-pair counts; ka/kb are the sorted int64 index keys."""
    npairs = ka.shape[0]
    for r in range(replicas):
        seed_r = _derive(master_seed, np.uint64(r))
        for k in range(npairs):
            u = _pair_u(seed_r, np.uint64(ka[k]), np.uint64(kb[k]))
            if u <= probs[k]:
                counts[k] += 1


@njit(cache=True)
def component_labels(n, edges):
    """Union-find labels; every vertex gets the smallest position in its component."""
    parent = np.arange(n, dtype=np.int64)
    size = np.ones(n, dtype=np.int64)
    for e in range(edges.shape[0]):
        a = edges[e, 0]
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        b = edges[e, 1]
        while parent[b] != b:
            parent[b] = parent[parent[b]]
            b = parent[b]
        if a != b:
            if size[a] < size[b]:
                a, b = b, a
            parent[b] = a
            size[a] += size[b]
    labels = np.empty(n, dtype=np.int64)
    minlab = np.full(n, n, dtype=np.int64)
    for v in range(n):
        r = v
        while parent[r] != r:
            r = parent[r]
        labels[v] = r
        if v < minlab[r]:
            minlab[r] = v
    for v in range(n):
        labels[v] = minlab[labels[v]]
    return labels
