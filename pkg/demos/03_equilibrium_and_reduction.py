"""
Solving the isolation game and shrinking it first
=================================================

The full game is finite: the defender mixes over H-subsets of the known
universe, the attacker over corruption sets, and the payoff is attacker
cost minus the prize when the defender's picks are swallowed.  Nodes
sharing a mask are interchangeable, so the game collapses onto size
classes before the LP ever runs.
"""

from peerguard import (
    GameSpec,
    MaskCost,
    check_cost_monotonicity,
    check_safety_level_persistence,
    check_support_dichotomy,
    parse_addr,
    solve,
)
from peerguard.game import reduction_report

# ---------------------------------------------------------------------------
# Six nodes in two /16 masks, two connections, mask-based pricing.

spec = GameSpec(
    universe=tuple(parse_addr(f"10.{m}.0.{i}") for m in (1, 2) for i in (1, 2, 3)),
    h=2,
    w_att=40.0,
    cost=MaskCost(c_new=2.0, c_node=1.0),
)
eq = solve(spec)
print(f"game value {eq.value:+.4f}  (certified gap {eq.gap:.1e})")
print("defender support:")
for atoms, p in eq.sigma1.support():
    print(f"  {p:.3f}  {sorted(map(str, atoms))}")
print("attacker support:")
for atoms, p in eq.sigma2.support():
    print(f"  {p:.3f}  {sorted(map(str, atoms)) or 'abstain'}")

# ---------------------------------------------------------------------------
# Equilibrium structure: the attacker either abstains or covers every
# defender set in support, and supported corruption sets order the same
# way by cost and by covered mass.

print("support dichotomy:", check_support_dichotomy(eq))
print("cost/coverage monotonicity:", check_cost_monotonicity(eq))

# ---------------------------------------------------------------------------
# The value survives the size-class reduction, and strategies translate
# back and forth exactly (the roundtrip runs in rational arithmetic).

rep = reduction_report(spec)
print(f"value full {rep.value_full:+.6f}  reduced {rep.value_reduced:+.6f}")
print("strategy roundtrip exact:", rep.roundtrip_exact)

# ---------------------------------------------------------------------------
# A safety level earned against prize W keeps holding when the prize
# drops: the defender's guarantee only improves.

level = eq.value - eq.gap
for w2 in (40.0, 10.0, 1.0):
    ok = check_safety_level_persistence(spec, spec.w_att, w2, eq.sigma1, level)
    print(f"level {level:+.4f} persists at W={w2}: {ok}")
