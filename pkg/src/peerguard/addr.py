"""Peer addresses, subnet-mask grouping, and mask-population statistics.

Peers are identified by IPv4 address. Grouping addresses by the top
``prefix_len`` bits yields the mask classes that both the cost model and
the bucketed buffer are built on.
"""

from __future__ import annotations

import csv
import math
from collections import Counter
from dataclasses import dataclass
from ipaddress import IPv4Address
from typing import IO, Iterable, Iterator, Mapping

__all__ = [
    "PeerAddr",
    "MaskId",
    "MaskCensus",
    "SnapshotParseError",
    "DEFAULT_PREFIX_LEN",
    "parse_addr",
    "parse_snapshot",
    "load_snapshot",
    "mask_of",
    "census",
    "inverse_mass_product",
    "write_census_csv",
    "write_mask_counts_csv",
]

PeerAddr = IPv4Address

DEFAULT_PREFIX_LEN = 16


class SnapshotParseError(ValueError):
    """A malformed line in a snapshot file, with its 1-based line number."""

    def __init__(self, line_no: int, text: str, reason: str):
        super().__init__(f"line {line_no}: bad peer address {text!r}: {reason}")
        self.line_no = line_no
        self.text = text


def parse_addr(text: str) -> PeerAddr:
    """Parse a dotted-quad IPv4 string into a PeerAddr."""
    return IPv4Address(text.strip())


def _iter_lines(source: IO[bytes] | IO[str] | Iterable[str]) -> Iterator[str]:
    for raw in source:
        if isinstance(raw, bytes):
            raw = raw.decode("utf-8")
        yield raw


def parse_snapshot(source: IO[bytes] | IO[str] | Iterable[str]) -> list[PeerAddr]:
    """Parse a peer snapshot: one dotted-quad address per line.

    Blank lines and lines starting with ``#`` are skipped.  Duplicates are
    preserved in file order; deduplication is the consumer's business (the
    buffer must face retransmissions, the census counts each address once).
    """
    addrs: list[PeerAddr] = []
    for line_no, line in enumerate(_iter_lines(source), start=1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        try:
            addrs.append(IPv4Address(text))
        except ValueError as exc:
            raise SnapshotParseError(line_no, text, str(exc)) from exc
    return addrs


def load_snapshot(path: str) -> list[PeerAddr]:
    with open(path, "rb") as fh:
        return parse_snapshot(fh)


@dataclass(frozen=True, order=True)
class MaskId:
    """A subnet mask class: the top ``prefix_len`` bits of an address."""

    prefix: int  # network base as a 32-bit int, host bits zero
    prefix_len: int = DEFAULT_PREFIX_LEN

    def __str__(self) -> str:
        return f"{IPv4Address(self.prefix)}/{self.prefix_len}"


def mask_of(addr: PeerAddr, prefix_len: int = DEFAULT_PREFIX_LEN) -> MaskId:
    """Truncate an address to its top ``prefix_len`` bits."""
    if not 0 < prefix_len <= 32:
        raise ValueError(f"prefix_len must be in 1..32, got {prefix_len}")
    shift = 32 - prefix_len
    return MaskId((int(addr) >> shift) << shift, prefix_len)


@dataclass(frozen=True)
class MaskCensus:
    """Distinct-node counts per mask, plus derived size-class statistics.

    ``size_histogram`` maps a mask size a to M_a, the number of nodes
    residing in masks that hold exactly a nodes; M_a = a * (#masks of
    size a) by construction.
    """

    counts: Mapping[MaskId, int]
    prefix_len: int = DEFAULT_PREFIX_LEN

    def __post_init__(self):
        for mask, n in self.counts.items():
            if n <= 0:
                raise ValueError(f"census count for {mask} must be positive, got {n}")
            if mask.prefix_len != self.prefix_len:
                raise ValueError(
                    f"mask {mask} disagrees with census prefix_len {self.prefix_len}"
                )

    @property
    def total_nodes(self) -> int:
        return sum(self.counts.values())

    @property
    def num_masks_by_size(self) -> dict[int, int]:
        """Mask size a -> number of masks holding exactly a nodes."""
        sizes = Counter(self.counts.values())
        return dict(sorted(sizes.items()))

    @property
    def size_histogram(self) -> dict[int, int]:
        """Mask size a -> M_a (node mass of the size-a class)."""
        return {a: a * k for a, k in self.num_masks_by_size.items()}

    def masks_of_size(self, a: int) -> list[MaskId]:
        """All masks holding exactly a nodes, sorted for determinism."""
        return sorted(m for m, n in self.counts.items() if n == a)

    def __len__(self) -> int:
        return len(self.counts)


def census(addrs: Iterable[PeerAddr], prefix_len: int = DEFAULT_PREFIX_LEN) -> MaskCensus:
    """Count distinct addresses per mask. Duplicates count once."""
    counts = Counter(mask_of(a, prefix_len) for a in set(addrs))
    return MaskCensus(dict(counts), prefix_len)


def inverse_mass_product(c: MaskCensus) -> float:
    """log10 of the inverse mask-mass product, prod over sizes a of 1/M_a.

    Returned as a log: a census of realistic size pushes the raw product
    tens of orders of magnitude below 1, and logs compose safely.
    """
    hist = c.size_histogram
    if not hist:
        raise ValueError("inverse_mass_product of an empty census")
    return -sum(math.log10(m_a) for m_a in hist.values())


def write_census_csv(c: MaskCensus, fh: IO[str]) -> None:
    """Size-class statistics as CSV: mask_size,num_masks,M_a."""
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["mask_size", "num_masks", "M_a"])
    masks_by_size = c.num_masks_by_size
    for a, m_a in c.size_histogram.items():
        writer.writerow([a, masks_by_size[a], m_a])


def write_mask_counts_csv(c: MaskCensus, fh: IO[str]) -> None:
    """Raw per-mask counts as CSV: mask,count."""
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["mask", "count"])
    for mask in sorted(c.counts):
        writer.writerow([str(mask), c.counts[mask]])
