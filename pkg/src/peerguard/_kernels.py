"""Compiled inner loops for the naive-buffer benchmark policies.

The naive policies face streams of millions of announcements, so their
per-announcement work is compiled.  Randomness comes from an inline
xorshift64* generator: eviction indices are taken modulo the capacity,
whose bias is immaterial for capacities far below 2^64, and the exact
sequence is reproducible from the seed (the determinism tests rely on
this).
"""

import numpy as np
from numba import njit

_MULT = np.uint64(2685821657736338717)
_DEFAULT_STATE = np.uint64(0x9E3779B97F4A7C15)


@njit(cache=True)
def naive_ingest(stream, n_ids, capacity, seed):
    """Uniform-eviction set buffer over a compact-id announcement stream.

    Announcements of an id already stored are no-ops; new ids fill the
    buffer and then replace uniformly random incumbents.  Evicted ids may
    re-enter on a later announcement (there is no filter).  Returns the
    final stored ids.
    """
    present = np.zeros(n_ids, dtype=np.uint8)
    buf = np.empty(capacity, dtype=np.int64)
    occ = 0
    state = np.uint64(seed)
    if state == np.uint64(0):
        state = _DEFAULT_STATE
    cap = np.uint64(capacity)
    for t in range(stream.shape[0]):
        x = stream[t]
        if present[x]:
            continue
        if occ < capacity:
            buf[occ] = x
            occ += 1
        else:
            state ^= state >> np.uint64(12)
            state ^= state << np.uint64(25)
            state ^= state >> np.uint64(27)
            i = np.int64((state * _MULT) % cap)
            present[buf[i]] = 0
            buf[i] = x
        present[x] = 1
    return buf[:occ]


@njit(cache=True)
def filtered_ingest(stream, probes, nbytes, capacity, seed):
    """Bloom-filtered uniform-eviction buffer over first occurrences.

    `stream` must hold each id at most once: with a filter in front,
    repeat announcements are provable no-ops, so callers pre-reduce the
    multiset stream to its first-occurrence order.  `probes[x]` holds the
    filter bit indices of id x.  False positives drop new ids outright,
    exactly as in the reference filter.
    """
    bits = np.zeros(nbytes, dtype=np.uint8)
    buf = np.empty(capacity, dtype=np.int64)
    occ = 0
    state = np.uint64(seed)
    if state == np.uint64(0):
        state = _DEFAULT_STATE
    cap = np.uint64(capacity)
    k = probes.shape[1]
    for t in range(stream.shape[0]):
        x = stream[t]
        hit = True
        for j in range(k):
            idx = probes[x, j]
            if not bits[idx >> 3] & (1 << (idx & 7)):
                hit = False
                break
        if hit:
            continue
        for j in range(k):
            idx = probes[x, j]
            bits[idx >> 3] |= 1 << (idx & 7)
        if occ < capacity:
            buf[occ] = x
            occ += 1
        else:
            state ^= state >> np.uint64(12)
            state ^= state << np.uint64(25)
            state ^= state >> np.uint64(27)
            i = np.int64((state * _MULT) % cap)
            buf[i] = x
    return buf[:occ]
