"""Independent reference implementations the tests check the package against.

Everything here is written from the algorithm definitions alone, in plain
Python, without importing the package internals.  Where the package has a
compiled or vectorized fast path, the oracle is the slow obvious version.
"""

from fractions import Fraction
from itertools import permutations

import numpy as np

MASK64 = (1 << 64) - 1
XORSHIFT_MULT = 2685821657736338717
XORSHIFT_DEFAULT_STATE = 0x9E3779B97F4A7C15


def xorshift64s(state: int) -> tuple[int, int]:
    """One xorshift64* step: returns (next_state, output)."""
    state &= MASK64
    state ^= state >> 12
    state ^= (state << 25) & MASK64
    state ^= state >> 27
    return state, (state * XORSHIFT_MULT) & MASK64


def naive_ingest_ref(stream, n_ids: int, capacity: int, seed: int) -> list[int]:
    """Uniform-eviction set buffer, slot for slot.

    Mirrors the compiled kernel's contract: ids already stored are no-ops,
    new ids fill then evict at (xorshift output mod capacity), and evicted
    ids may come back on a later announcement.
    """
    present = [False] * n_ids
    buf: list[int] = []
    state = seed & MASK64 or XORSHIFT_DEFAULT_STATE
    for x in stream:
        x = int(x)
        if present[x]:
            continue
        if len(buf) < capacity:
            buf.append(x)
        else:
            state, out = xorshift64s(state)
            i = out % capacity
            present[buf[i]] = False
            buf[i] = x
        present[x] = True
    return buf


def filtered_ingest_ref(stream, probes, nbytes: int, capacity: int, seed: int) -> list[int]:
    """Bloom-gated uniform-eviction buffer over a first-occurrence stream."""
    bits = bytearray(nbytes)
    buf: list[int] = []
    state = seed & MASK64 or XORSHIFT_DEFAULT_STATE
    for x in stream:
        x = int(x)
        row = probes[x]
        if all(bits[idx >> 3] & (1 << (idx & 7)) for idx in row):
            continue
        for idx in row:
            bits[idx >> 3] |= 1 << (idx & 7)
        if len(buf) < capacity:
            buf.append(x)
        else:
            state, out = xorshift64s(state)
            buf[out % capacity] = x
    return buf


def bucket_retention_probs(ell: int, k: int) -> list[Fraction]:
    """Exact retention law of the admission/eviction recursion.

    Enumerates the distribution over bucket states after a stream of ell
    distinct same-bucket announcements: announcement t is admitted with
    probability min(1, k/t) and, when the bucket is full, replaces a
    uniform incumbent.  Returns P(address i survives) for each i.
    """
    states: dict[frozenset, Fraction] = {frozenset(): Fraction(1)}
    for t in range(1, ell + 1):
        addr = t - 1
        nxt: dict[frozenset, Fraction] = {}

        def put(state: frozenset, p: Fraction) -> None:
            nxt[state] = nxt.get(state, Fraction(0)) + p

        for state, p in states.items():
            if t <= k:
                put(state | {addr}, p)
                continue
            admit = Fraction(k, t)
            put(state, p * (1 - admit))
            for victim in state:
                put((state - {victim}) | {addr}, p * admit / k)
        states = nxt
    return [
        sum((p for s, p in states.items() if i in s), Fraction(0))
        for i in range(ell)
    ]


def bucket_selection_probs(ell: int, k: int) -> list[Fraction]:
    """Retention composed with a uniform in-bucket draw of one record."""
    take = min(k, ell)  # the bucket ends up holding this many
    return [p / take for p in bucket_retention_probs(ell, k)]


def first_occurrence_order_probs(weights) -> dict[tuple, Fraction]:
    """Exact law of the first-occurrence order of a shuffled weighted multiset.

    Successive-sampling form: the next first-seen id is w_i over the
    total weight still unseen.
    """
    n = len(weights)
    out: dict[tuple, Fraction] = {}
    for order in permutations(range(n)):
        p = Fraction(1)
        remaining = sum(weights)
        for i in order:
            p *= Fraction(weights[i], remaining)
            remaining -= weights[i]
        out[order] = p
    return out


def pure_strategy_bounds(payoff) -> tuple[float, float]:
    """Pure maximin / minimax envelopes bracketing any mixed game value."""
    payoff = np.asarray(payoff, dtype=float)
    lower = payoff.min(axis=1).max()  # row player's pure guarantee
    upper = payoff.max(axis=0).min()  # column player's pure concession
    return float(lower), float(upper)
