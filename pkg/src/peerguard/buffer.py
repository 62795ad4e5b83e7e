"""Restricted-memory peer buffer with streaming-uniform retention.

Announcements are deduplicated by a Bloom filter, grouped into buckets by
an equivalence key (subnet mask by default), and admitted with probability
bucket_size / announcements-seen-so-far in that bucket, evicting a random
incumbent when full.  The net effect: after any stream of distinct
same-bucket addresses, each one is stored with equal probability, so an
attacker gains nothing by flooding retransmissions or concentrating fake
peers inside few buckets.

An EpochPair runs two buffers on alternating reset schedules so stale
records age out every two periods while selections always come from a
buffer with at least one full period of history.
"""

from __future__ import annotations

import csv
import json
import random
from dataclasses import dataclass, field, replace
from typing import IO, Callable, Hashable, Iterable, Sequence

from .addr import DEFAULT_PREFIX_LEN, PeerAddr, mask_of
from .bloom import BloomFilter, _mix64

__all__ = [
    "BucketConfig",
    "PeerBuffer",
    "EpochPair",
    "BucketShortfallError",
    "MemoryFootprint",
    "mask_key",
    "single_bucket_key",
    "GLOBAL_BUCKET",
    "memory_footprint",
    "write_buffer_state",
]

KeyFunc = Callable[[PeerAddr], Hashable]

# Key for the single-bucket configuration used under constant per-node
# costs, where all addresses are interchangeable.
GLOBAL_BUCKET = "*"


def mask_key(prefix_len: int = DEFAULT_PREFIX_LEN) -> KeyFunc:
    """Bucket announcements by their subnet mask."""

    def key(addr: PeerAddr) -> Hashable:
        return mask_of(addr, prefix_len)

    return key


def single_bucket_key(addr: PeerAddr) -> Hashable:
    return GLOBAL_BUCKET


@dataclass(frozen=True)
class BucketConfig:
    """Buffer sizing and grouping.

    bucket_size = H is the minimal sizing that supports any H-connection
    plan; larger buckets tolerate churn.  bloom_bytes should be sized for
    roughly 1% false positives at the expected stream volume.
    """

    equivalence_key: KeyFunc = field(default_factory=mask_key)
    bucket_size: int = 8
    bloom_bytes: int = 1 << 16
    bloom_hashes: int = 7
    seed: int = 0

    def __post_init__(self):
        if self.bucket_size < 1:
            raise ValueError(f"bucket_size must be at least 1, got {self.bucket_size}")
        if self.bloom_bytes < 1:
            raise ValueError(f"bloom_bytes must be at least 1, got {self.bloom_bytes}")
        if self.bloom_hashes < 1:
            raise ValueError(f"bloom_hashes must be at least 1, got {self.bloom_hashes}")


class BucketShortfallError(LookupError):
    """A selection plan asked a bucket for more live records than it holds."""

    def __init__(self, bucket: Hashable, requested: int, available: int):
        super().__init__(
            f"bucket {bucket!r}: plan needs {requested} live records, have {available}"
        )
        self.bucket = bucket
        self.requested = requested
        self.available = available


@dataclass(frozen=True)
class MemoryFootprint:
    record_capacity: int
    filter_bytes: int


def memory_footprint(cfg: BucketConfig, num_buckets: int) -> MemoryFootprint:
    """Worst-case stored records plus filter bytes for a bucket count."""
    return MemoryFootprint(num_buckets * cfg.bucket_size, cfg.bloom_bytes)


class PeerBuffer:
    """Single-copy buffer: buckets, per-bucket history, dedup filter.

    Single logical writer; callers serialize on_announce / clear /
    selection externally.
    """

    def __init__(self, config: BucketConfig):
        self.config = config
        self.filter = BloomFilter(
            8 * config.bloom_bytes, config.bloom_hashes, seed=_mix64(config.seed)
        )
        self.rng = random.Random(_mix64(config.seed ^ 0xB0FFE7))
        self.buckets: dict[Hashable, list[PeerAddr]] = {}
        self.history: dict[Hashable, int] = {}

    def key(self, addr: PeerAddr) -> Hashable:
        return self.config.equivalence_key(addr)

    def on_announce(self, addr: PeerAddr) -> bool:
        """Process one announcement; returns whether it was admitted.

        Filter hits end processing immediately, so duplicates change
        nothing.  Otherwise the bucket's history grows by one and the
        address is admitted with probability bucket_size/history (certain
        while history <= bucket_size), replacing a uniformly chosen
        incumbent when the bucket is full.  The address enters the filter
        whether or not it was admitted.
        """
        if self.filter.contains(addr):
            return False
        key = self.key(addr)
        seen = self.history.get(key, 0) + 1
        self.history[key] = seen
        size = self.config.bucket_size
        admit = seen <= size or self.rng.random() * seen < size
        if admit:
            bucket = self.buckets.setdefault(key, [])
            if len(bucket) >= size:
                victim = self.rng.randrange(len(bucket))
                bucket[victim] = addr
            else:
                bucket.append(addr)
        self.filter.insert(addr)
        return admit

    def extend(self, addrs: Iterable[PeerAddr]) -> None:
        for addr in addrs:
            self.on_announce(addr)

    def occupancy(self, key: Hashable) -> int:
        return len(self.buckets.get(key, ()))

    def stored(self) -> set[PeerAddr]:
        return {a for bucket in self.buckets.values() for a in bucket}

    def select_connections(self, plan: Sequence[Hashable]) -> set[PeerAddr]:
        """Draw one stored address per plan entry, uniformly per bucket.

        Repeated keys in the plan draw without replacement from the same
        bucket.  Raises BucketShortfallError when a bucket cannot supply
        its multiplicity; callers re-plan.
        """
        return self.select_with_staleness(plan, lambda addr: True)

    def select_with_staleness(
        self, plan: Sequence[Hashable], alive: Callable[[PeerAddr], bool]
    ) -> set[PeerAddr]:
        """Like select_connections but restricted to live records.

        A uniform draw over live incumbents is distributed as a uniform
        draw over the live subset of the original stream, so staleness
        does not break the selection guarantee.
        """
        needs: dict[Hashable, int] = {}
        for key in plan:  # first-appearance order keeps draws deterministic
            needs[key] = needs.get(key, 0) + 1
        chosen: set[PeerAddr] = set()
        for key, count in needs.items():
            live = [a for a in self.buckets.get(key, ()) if alive(a)]
            if len(live) < count:
                raise BucketShortfallError(key, count, len(live))
            chosen.update(self.rng.sample(live, count))
        return chosen

    def clear(self) -> None:
        self.buckets.clear()
        self.history.clear()
        self.filter.clear()


class EpochPair:
    """Two buffer copies on alternating 2T reset schedules.

    Both copies ingest every announcement (each filters and admits
    independently).  At every period boundary the copy that has absorbed
    two full periods is wiped and starts warming; the other copy, with at
    least one period of history, serves selections.  Before the first
    boundary the initial copy serves best-effort (bootstrap exception).
    """

    def __init__(self, config: BucketConfig, period: float, start: float = 0.0):
        if period <= 0:
            raise ValueError(f"period must be positive, got {period}")
        self.period = period
        self.start = start
        self.epoch_clock = 0
        self.copies = (
            PeerBuffer(config),
            PeerBuffer(replace(config, seed=_mix64(config.seed ^ 0x5EC0ED))),
        )

    @property
    def serving(self) -> PeerBuffer:
        if self.epoch_clock == 0:
            return self.copies[0]
        return self.copies[(self.epoch_clock - 1) % 2]

    @property
    def warming(self) -> PeerBuffer:
        if self.epoch_clock == 0:
            return self.copies[1]
        return self.copies[self.epoch_clock % 2]

    def rotate_epoch(self, now: float) -> None:
        """Advance the clock to `now`, wiping copies at crossed boundaries."""
        target = int((now - self.start) // self.period)
        while self.epoch_clock < target:
            self.epoch_clock += 1
            self.copies[self.epoch_clock % 2].clear()

    def on_announce(self, addr: PeerAddr) -> None:
        for copy in self.copies:
            copy.on_announce(addr)

    def select_connections(self, plan: Sequence[Hashable]) -> set[PeerAddr]:
        return self.serving.select_connections(plan)

    def select_with_staleness(
        self, plan: Sequence[Hashable], alive: Callable[[PeerAddr], bool]
    ) -> set[PeerAddr]:
        return self.serving.select_with_staleness(plan, alive)


def write_buffer_state(buf: PeerBuffer, csv_fh: IO[str], json_fh: IO[str]) -> None:
    """Dump bucket contents as CSV plus a JSON header with config/history."""
    writer = csv.writer(csv_fh, lineterminator="\n")
    writer.writerow(["bucket_key", "addr"])
    for key in sorted(buf.buckets, key=str):
        for addr in sorted(buf.buckets[key]):
            writer.writerow([str(key), str(addr)])
    header = {
        "bucket_size": buf.config.bucket_size,
        "bloom_bytes": buf.config.bloom_bytes,
        "bloom_hashes": buf.config.bloom_hashes,
        "seed": buf.config.seed,
        "history": {str(k): v for k, v in sorted(buf.history.items(), key=lambda kv: str(kv[0]))},
    }
    json.dump(header, json_fh, indent=2, sort_keys=True)
    json_fh.write("\n")
