import numpy as np
import pytest

from peerguard.bloom import BloomFilter, probe_matrix, theoretical_fpr


def test_no_false_negatives():
    rng = np.random.default_rng(1)
    keys = rng.integers(0, 1 << 32, size=2000)
    bf = BloomFilter(m=1 << 14, k=5, seed=3)
    for x in keys:
        bf.insert(int(x))
    assert all(bf.contains(int(x)) for x in keys)
    assert bf.inserted == 2000


def test_contains_protocol():
    bf = BloomFilter(m=256, k=3, seed=0)
    bf.insert(42)
    assert 42 in bf
    assert bf.contains(42)


def test_deterministic_per_seed():
    a = BloomFilter(m=1 << 10, k=4, seed=9)
    b = BloomFilter(m=1 << 10, k=4, seed=9)
    c = BloomFilter(m=1 << 10, k=4, seed=10)
    for x in range(100):
        a.insert(x)
        b.insert(x)
        c.insert(x)
    assert a.bit_snapshot() == b.bit_snapshot()
    assert a.bit_snapshot() != c.bit_snapshot()


def test_probes_stay_in_range_and_differ():
    bf = BloomFilter(m=1000, k=8, seed=5)  # deliberately not a power of two
    for x in (0, 1, 17, 1 << 40):
        probes = list(bf._probes(x))
        assert len(probes) == 8
        assert all(0 <= p < 1000 for p in probes)


def test_probe_matrix_matches_scalar_filter():
    rng = np.random.default_rng(2)
    xs = rng.integers(0, 1 << 48, size=500, dtype=np.uint64)
    for m, k, seed in [(1 << 13, 7, 0), (1 << 10, 3, 77), (1000, 4, 5), (96, 2, 1)]:
        bf = BloomFilter(m=m, k=k, seed=seed)
        mat = probe_matrix(xs, m, k, seed=seed)
        for j, x in enumerate(xs):
            assert list(bf._probes(int(x))) == list(mat[j])


def test_clear():
    bf = BloomFilter(m=512, k=3, seed=0)
    bf.insert(7)
    assert bf.bit_count() > 0
    bf.clear()
    assert bf.bit_count() == 0
    assert bf.inserted == 0
    assert not bf.contains(7)


def test_validation():
    with pytest.raises(ValueError):
        BloomFilter(m=0, k=1)
    with pytest.raises(ValueError):
        BloomFilter(m=8, k=0)


def test_nbytes():
    assert BloomFilter(m=8, k=1).nbytes == 1
    assert BloomFilter(m=9, k=1).nbytes == 2
    assert BloomFilter(m=1 << 16, k=1).nbytes == 8192


def test_sized_for_hits_requested_fpr():
    bf = BloomFilter.sized_for(5000, fpr=0.01, seed=0)
    assert theoretical_fpr(bf.m, bf.k, 5000) < 0.02
    with pytest.raises(ValueError):
        BloomFilter.sized_for(0)
    with pytest.raises(ValueError):
        BloomFilter.sized_for(10, fpr=1.5)


def test_empirical_fpr_tracks_theory():
    m, k, n = 1 << 13, 4, 1000
    bf = BloomFilter(m=m, k=k, seed=11)
    for x in range(n):
        bf.insert(x)
    probes = 40_000
    hits = sum(bf.contains(x) for x in range(1 << 20, (1 << 20) + probes))
    expected = theoretical_fpr(m, k, n)
    got = hits / probes
    sigma = (expected * (1 - expected) / probes) ** 0.5
    assert abs(got - expected) < max(4 * sigma, 0.3 * expected)
