"""
The peer buffer: uniform retention no matter who shouts loudest
===============================================================

The defense stores announced addresses in per-mask buckets of fixed size
k.  Admission is min(1, k/seen) with uniform eviction, and a Bloom
filter makes repeat announcements free.  The result: every address ever
announced into a bucket survives with probability exactly k/l, however
hard an attacker replays its own addresses.
"""

from collections import Counter

from peerguard import BucketConfig, EpochPair, PeerBuffer, mask_key, parse_addr

K, ELL, RUNS = 4, 8, 5000
addrs = [parse_addr(f"10.1.0.{i}") for i in range(1, ELL + 1)]


def config(seed):
    return BucketConfig(equivalence_key=mask_key(16), bucket_size=K,
                        bloom_bytes=512, bloom_hashes=4, seed=seed)

# ---------------------------------------------------------------------------
# Announce l=8 addresses into a k=4 bucket, many times over.  Retention
# should be 4/8 for every address, first-announced or last.

plain = Counter()
for run in range(RUNS):
    buf = PeerBuffer(config(seed=run))
    for a in addrs:
        buf.on_announce(a)
    plain.update(buf.stored())

print(f"retention over {RUNS} runs (expect {K}/{ELL} = {K / ELL} each):")
for a in addrs:
    print(f"  {a}: {plain[a] / RUNS:.3f}")

# ---------------------------------------------------------------------------
# Now let one address spam itself 50 times per run.  The Bloom filter
# eats the repeats, so the retention histogram does not move.

flooded = Counter()
for run in range(RUNS):
    buf = PeerBuffer(config(seed=run))
    for a in addrs:
        buf.on_announce(a)
        for _ in range(50):
            buf.on_announce(addrs[0])
    flooded.update(buf.stored())

print("same, with address 1 replayed 50x per step:")
for a in addrs:
    print(f"  {a}: {flooded[a] / RUNS:.3f}")
assert flooded == plain  # replays consume no randomness at all

# ---------------------------------------------------------------------------
# Long-lived state needs to forget: the epoch pair keeps two buffer
# copies and wipes the idle one at each epoch boundary, so an address
# that stops being announced ages out after two periods.

pair = EpochPair(config(seed=1), period=100.0)
pair.on_announce(addrs[0])
print("epoch 0 serving:", sorted(map(str, pair.serving.stored())))
pair.rotate_epoch(now=120.0)   # boundary 1: the warming copy is wiped
pair.rotate_epoch(now=230.0)   # boundary 2: the copy holding addr 1 goes
print("two periods later:", sorted(map(str, pair.serving.stored())))
