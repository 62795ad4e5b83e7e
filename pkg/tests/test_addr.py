import io
import math

import pytest

from peerguard.addr import (
    MaskCensus,
    MaskId,
    SnapshotParseError,
    census,
    inverse_mass_product,
    mask_of,
    parse_addr,
    parse_snapshot,
    write_census_csv,
    write_mask_counts_csv,
)


def test_parse_addr():
    assert int(parse_addr("10.1.2.3")) == (10 << 24) + (1 << 16) + (2 << 8) + 3
    assert parse_addr("  192.168.0.1\n") == parse_addr("192.168.0.1")
    with pytest.raises(ValueError):
        parse_addr("10.1.2.999")


def test_parse_snapshot_skips_blanks_and_comments():
    text = "# header\n10.0.0.1\n\n  \n10.0.0.2\n# trailing\n"
    addrs = parse_snapshot(io.StringIO(text))
    assert [str(a) for a in addrs] == ["10.0.0.1", "10.0.0.2"]


def test_parse_snapshot_keeps_duplicates_in_order():
    addrs = parse_snapshot(["1.2.3.4", "1.2.3.4", "5.6.7.8"])
    assert [str(a) for a in addrs] == ["1.2.3.4", "1.2.3.4", "5.6.7.8"]


def test_parse_snapshot_reports_line_number():
    with pytest.raises(SnapshotParseError) as exc:
        parse_snapshot(["10.0.0.1", "not-an-ip", "10.0.0.2"])
    assert exc.value.line_no == 2
    assert exc.value.text == "not-an-ip"


def test_parse_snapshot_accepts_bytes():
    addrs = parse_snapshot([b"10.0.0.1\n", b"10.0.0.2\n"])
    assert len(addrs) == 2


def test_mask_of():
    addr = parse_addr("10.1.2.3")
    assert str(mask_of(addr, 16)) == "10.1.0.0/16"
    assert str(mask_of(addr, 8)) == "10.0.0.0/8"
    assert str(mask_of(addr, 32)) == "10.1.2.3/32"
    with pytest.raises(ValueError):
        mask_of(addr, 0)
    with pytest.raises(ValueError):
        mask_of(addr, 33)


def test_mask_id_is_hashable_and_ordered():
    a = mask_of(parse_addr("10.1.0.5"), 16)
    b = mask_of(parse_addr("10.1.255.9"), 16)
    c = mask_of(parse_addr("10.2.0.1"), 16)
    assert a == b and hash(a) == hash(b)
    assert a < c


def test_census_counts_distinct_addresses_once():
    addrs = [parse_addr(s) for s in ["10.1.0.1", "10.1.0.1", "10.1.0.2", "10.2.0.1"]]
    cen = census(addrs)
    assert cen.total_nodes == 3
    assert cen.counts[mask_of(parse_addr("10.1.0.1"))] == 2
    assert cen.counts[mask_of(parse_addr("10.2.0.1"))] == 1
    assert len(cen) == 2


def test_census_validation():
    mask = mask_of(parse_addr("10.1.0.1"), 16)
    with pytest.raises(ValueError):
        MaskCensus({mask: 0})
    with pytest.raises(ValueError):
        MaskCensus({mask: 1}, prefix_len=24)


def test_size_histogram():
    # two masks of 2 nodes, one mask of 1 node
    addrs = [parse_addr(s) for s in
             ["10.1.0.1", "10.1.0.2", "10.2.0.1", "10.2.0.2", "10.3.0.1"]]
    cen = census(addrs)
    assert cen.num_masks_by_size == {1: 1, 2: 2}
    assert cen.size_histogram == {1: 1, 2: 4}
    assert cen.masks_of_size(2) == sorted(cen.masks_of_size(2))
    assert len(cen.masks_of_size(2)) == 2
    assert cen.masks_of_size(3) == []


def build_census(groups):
    """groups: list of (size, count) pairs on disjoint /16 prefixes."""
    counts = {}
    next_prefix = 10 << 24
    for size, count in groups:
        for _ in range(count):
            counts[MaskId(next_prefix, 16)] = size
            next_prefix += 1 << 16
    return MaskCensus(counts, 16)


def test_inverse_mass_product_single_class():
    # one mask of 2 plus one mask of 1: M_2 = 2, M_1 = 1, product = 2
    cen = build_census([(2, 1), (1, 1)])
    assert cen.size_histogram == {1: 1, 2: 2}
    assert inverse_mass_product(cen) == pytest.approx(math.log10(1 / 2), abs=1e-15)


def test_inverse_mass_product_three_classes():
    # M_1 = 5, M_2 = 8, M_3 = 9 so the product of masses is 360
    cen = build_census([(1, 5), (2, 4), (3, 3)])
    assert cen.size_histogram == {1: 5, 2: 8, 3: 9}
    assert inverse_mass_product(cen) == pytest.approx(-math.log10(360), abs=1e-12)


def test_inverse_mass_product_empty_census():
    with pytest.raises(ValueError):
        inverse_mass_product(MaskCensus({}, 16))


def test_write_census_csv():
    cen = build_census([(2, 2), (1, 1)])
    out = io.StringIO()
    write_census_csv(cen, out)
    assert out.getvalue() == "mask_size,num_masks,M_a\n1,1,1\n2,2,4\n"


def test_write_mask_counts_csv():
    addrs = [parse_addr(s) for s in ["10.2.0.1", "10.1.0.1", "10.1.0.2"]]
    out = io.StringIO()
    write_mask_counts_csv(census(addrs), out)
    assert out.getvalue() == "mask,count\n10.1.0.0/16,2\n10.2.0.0/16,1\n"
