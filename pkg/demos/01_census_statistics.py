"""
Mask census and the inverse mass product
========================================

A peer snapshot collapses into a census: how many distinct nodes live in
each /16 mask.  The census drives everything else in the library, and
its headline statistic, the inverse mask-mass product, measures how hard
the population is to impersonate end to end.
"""

import math

from peerguard import census, inverse_mass_product, parse_addr
from peerguard.sim import synthetic_census

# ---------------------------------------------------------------------------
# A small hand-made snapshot: three /16 ranges of different occupancy.

addrs = [parse_addr(s) for s in [
    "10.1.0.1", "10.1.0.2", "10.1.0.3",   # three nodes in 10.1/16
    "10.2.0.1", "10.2.0.2",               # two in 10.2/16
    "10.3.0.9",                           # a singleton
    "10.1.0.1",                           # duplicates count once
]]
cen = census(addrs)

print("masks:", len(cen), " distinct nodes:", cen.total_nodes)
for size, k in cen.num_masks_by_size.items():
    print(f"  {k} mask(s) of {size} node(s)  ->  M_{size} = {size * k}")

# The product multiplies one factor 1/M_a per occupied size class.  For
# this toy census that is 1/(3*2*1) and the log10 says so.
print("inverse mass product (log10):", inverse_mass_product(cen))
assert math.isclose(inverse_mass_product(cen), -math.log10(6.0))

# ---------------------------------------------------------------------------
# At realistic scale the raw product is absurdly small, which is the
# point: it is the chance that independent uniform picks, one per size
# class, all land on attacker nodes when the attacker owns one node per
# class.  Thirteen size classes of about ten thousand nodes each push it
# more than fifty orders of magnitude below one.

big = synthetic_census([(a, max(1, 10_000 // a)) for a in range(1, 14)])
log_product = inverse_mass_product(big)
print(f"13-class census: {big.total_nodes} nodes, product ~ 1e{log_product:.0f}")
