"""peerguard: game-theoretic peer-selection defenses for P2P overlays.

The library models eclipse/Sybil isolation as a zero-sum game between a
node picking H connections and an attacker buying addresses, and ships
the defense that the analysis culminates in: a bucketed, Bloom-filtered
peer buffer whose retention is uniform over everything ever announced,
making isolation as expensive as buying out whole subnet ranges.
"""

from .addr import (
    DEFAULT_PREFIX_LEN,
    MaskCensus,
    MaskId,
    PeerAddr,
    SnapshotParseError,
    census,
    inverse_mass_product,
    load_snapshot,
    mask_of,
    parse_addr,
    parse_snapshot,
)
from .bloom import BloomFilter, theoretical_fpr
from .buffer import (
    BucketConfig,
    BucketShortfallError,
    EpochPair,
    PeerBuffer,
    mask_key,
    memory_footprint,
    single_bucket_key,
)
from .cost import (
    ConstantCost,
    InfeasibleAllocationError,
    MaskCost,
    avg_node_cost,
    cost_model_from_config,
    min_cost_for_allocation,
)
from .game import (
    Equilibrium,
    GameSpec,
    MixedStrategy,
    ReducedGame,
    SizeGuardError,
    check_cost_monotonicity,
    check_reduction_value,
    check_safety_level_persistence,
    check_support_dichotomy,
    mixed_utility,
    reduce,
    solve,
    utility,
)
from .safety import (
    RestrictedDefender,
    SafetyReport,
    analytic_lower_bound,
    attacker_best_response,
    safety_level,
    success_probability,
)
from .sim import (
    AttackOutcomeCurve,
    AttackScenario,
    MaskBucketed,
    NaiveUniform,
    NaiveWithFilter,
    compare_policies,
    run_scenario,
    synthetic_census,
)

__version__ = "0.1.0"
