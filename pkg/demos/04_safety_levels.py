"""
Safety levels against a budgeted attacker
=========================================

The full LP stops scaling around fifteen nodes, but the deployed defense
only mixes within size classes, and against that restricted defender the
attacker's problem is a small allocation search.  This prices isolation
on a census far beyond LP range: fifty /16 masks of eight nodes each.
"""

from peerguard import (
    MaskCost,
    RestrictedDefender,
    attacker_best_response,
    safety_level,
)
from peerguard.safety import analytic_lower_bound
from peerguard.sim import synthetic_census

census = synthetic_census([(8, 50)])
cost = MaskCost(c_new=10.0, c_node=1.0)
defender = RestrictedDefender.uniform_over_masks(census, h=8)
W = 1e9

# ---------------------------------------------------------------------------
# Sweep the attacker's budget from nothing to the full census buyout.
# Success is (corrupted fraction)^H; small budgets do not move it.

buyout = cost.c_new * 50 + cost.c_node * 400
print(f"census: 50 masks x 8 nodes, buyout costs {buyout:.0f}")
print(f"{'budget':>8} {'spent':>8} {'x_8':>5} {'success':>10} {'atk utility':>14}")
for budget in (0.0, 180.0, 360.0, 540.0, 720.0, 900.0):
    r = attacker_best_response(defender, census, cost, W, budget=budget)
    x = r.allocation.get(8, 0)
    print(f"{budget:8.0f} {r.investment:8.0f} {x:5d} "
          f"{r.success_prob:10.2e} {r.expected_utility:14.1f}")

# ---------------------------------------------------------------------------
# Unbounded budget: with a prize this large the attacker buys everything,
# and the defender's guaranteed utility is the buyout minus the prize.

level = safety_level(defender, census, cost, W)
print(f"safety level (unbounded attacker): {level:.1f}")
assert level == buyout - W

# ---------------------------------------------------------------------------
# The closed-form bound needs no search at all and, with the census
# balanced so every class has equal corrupted fractions, it stays at or
# below the attacker's true optimum.

bound = analytic_lower_bound(defender, census.size_histogram, census, cost, W)
print(f"closed-form lower bound at full corruption: {bound:.1f}")
