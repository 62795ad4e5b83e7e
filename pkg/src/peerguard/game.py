"""Finite instances of the zero-sum isolation game, a solver, and checks.

The defender picks H connection targets out of the universe V; the
attacker corrupts a subset B at cost C(B) and wins W_att when the
defender's whole selection lands inside B.  Utilities are materialized
as a payoff matrix over bitmask-encoded pure strategies, solved by
linear programming, and certified a posteriori by best-response gaps.

The equivalence reduction groups defender sets that differ only by
swapping nodes within a subnet mask; solving the small reduced game and
mapping back preserves the value and safety levels.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.optimize import linprog

from .addr import PeerAddr, mask_of, parse_addr
from .cost import (
    ConstantCost,
    CostModel,
    MaskCost,
    cost_model_from_config,
    cost_model_to_config,
)

__all__ = [
    "GameSpec",
    "GameTable",
    "MixedStrategy",
    "Equilibrium",
    "ReducedGame",
    "ReductionReport",
    "SizeGuardError",
    "utility",
    "mixed_utility",
    "solve",
    "reduce",
    "strategy_to_classes",
    "strategy_from_classes",
    "check_safety_level_persistence",
    "check_support_dichotomy",
    "check_cost_monotonicity",
    "check_reduction_value",
    "reduction_report",
    "game_spec_from_json",
    "game_spec_to_json",
    "equilibrium_to_json",
]

# Full 2^V attacker enumeration is materialized only up to this universe
# size; larger instances need a cost cap or the reduced game.
MAX_FULL_UNIVERSE = 14
_MAX_CELLS = 50_000_000


class SizeGuardError(RuntimeError):
    """The requested game is too large to materialize."""


@dataclass(frozen=True)
class GameSpec:
    """One game instance: universe V, connection count H, prize, costs."""

    universe: tuple[PeerAddr, ...]
    h: int
    w_att: float
    cost: CostModel

    def __post_init__(self):
        object.__setattr__(self, "universe", tuple(self.universe))
        if len(set(self.universe)) != len(self.universe):
            raise ValueError("universe contains duplicate addresses")
        if not 1 <= self.h <= len(self.universe):
            raise ValueError(f"need 1 <= H <= |V|, got H={self.h}, |V|={len(self.universe)}")
        if self.w_att < 0:
            raise ValueError(f"W_att must be nonnegative, got {self.w_att}")


def utility(spec: GameSpec, a: Iterable[PeerAddr], b: Iterable[PeerAddr]) -> float:
    """Pure-strategy utility: C(B), minus W_att when A is covered by B."""
    a = frozenset(a)
    b = frozenset(b)
    if len(a) != spec.h:
        raise ValueError(f"defender set must have exactly H={spec.h} nodes, got {len(a)}")
    value = spec.cost.cost(b)
    if a <= b:
        value -= spec.w_att
    return value


@dataclass(frozen=True)
class MixedStrategy:
    """A probability vector over an explicit list of pure strategies."""

    atoms: tuple[frozenset, ...]
    probs: np.ndarray

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float)
        object.__setattr__(self, "probs", probs)
        if len(self.atoms) != probs.shape[0]:
            raise ValueError("atoms and probabilities differ in length")
        if probs.min(initial=0.0) < -1e-9:
            raise ValueError(f"negative probability {probs.min()}")
        if abs(probs.sum() - 1.0) > 1e-9:
            raise ValueError(f"probabilities sum to {probs.sum()}, not 1")

    @classmethod
    def point(cls, atom: frozenset) -> "MixedStrategy":
        return cls((frozenset(atom),), np.array([1.0]))

    def support(self, atol: float = 1e-9) -> list[tuple[frozenset, float]]:
        return [
            (atom, float(p))
            for atom, p in zip(self.atoms, self.probs)
            if p > atol
        ]


def mixed_utility(spec: GameSpec, sigma1: MixedStrategy, sigma2: MixedStrategy) -> float:
    """Bilinear form over the pure utility; sums over both supports."""
    total = 0.0
    for b, pb in zip(sigma2.atoms, sigma2.probs):
        if pb == 0.0:
            continue
        total += pb * spec.cost.cost(b)
        for a, pa in zip(sigma1.atoms, sigma1.probs):
            if pa != 0.0 and len(a) != spec.h:
                raise ValueError(f"defender atom of size {len(a)}, expected H={spec.h}")
            if pa != 0.0 and a <= b:
                total -= spec.w_att * pa * pb
    return total


class GameTable:
    """Materialized pure-strategy spaces and the payoff matrix.

    Strategies are bitmasks over universe indexes.  payoff[i, j] =
    costs[j] - W_att * coverage[i, j].
    """

    def __init__(
        self,
        spec: GameSpec,
        defender: np.ndarray,
        attacker: np.ndarray,
        costs: np.ndarray,
        coverage: np.ndarray,
    ):
        self.spec = spec
        self.defender = defender
        self.attacker = attacker
        self.costs = costs
        self.coverage = coverage
        self.payoff = costs[None, :] - spec.w_att * coverage

    @classmethod
    def build(
        cls,
        spec: GameSpec,
        attacker_cost_cap: float | None = None,
        prune_dominated: bool = False,
    ) -> "GameTable":
        n = len(spec.universe)
        if n > 64:
            raise SizeGuardError(f"universe of {n} nodes exceeds the bitmask width")
        if attacker_cost_cap is None and n > MAX_FULL_UNIVERSE:
            raise SizeGuardError(
                f"full attacker space 2^{n} is too large; pass attacker_cost_cap "
                "or analyze the reduced game"
            )
        defender = np.array(
            [_bits_from_indexes(ix) for ix in combinations(range(n), spec.h)],
            dtype=np.uint64,
        )
        attacker_masks = _enumerate_attacker(spec, attacker_cost_cap)
        if prune_dominated:
            # Any B with 0 < |B| < H covers nothing and costs more than the
            # empty set; removing one node from a covering B always uncovers
            # some A, so these are exactly the dominated strategies.
            attacker_masks = [
                m for m in attacker_masks if m == 0 or int(m).bit_count() >= spec.h
            ]
        attacker = np.array(attacker_masks, dtype=np.uint64)
        if defender.shape[0] * attacker.shape[0] > _MAX_CELLS:
            raise SizeGuardError(
                f"payoff matrix {defender.shape[0]}x{attacker.shape[0]} exceeds "
                "the materialization guard; tighten attacker_cost_cap or reduce"
            )
        costs = np.array(
            [spec.cost.cost(_set_from_bits(spec, m)) for m in attacker_masks],
            dtype=float,
        )
        coverage = (defender[:, None] & attacker[None, :]) == defender[:, None]
        return cls(spec, defender, attacker, costs, coverage.astype(float))

    def defender_sets(self) -> list[frozenset]:
        return [_set_from_bits(self.spec, m) for m in self.defender]

    def attacker_sets(self) -> list[frozenset]:
        return [_set_from_bits(self.spec, m) for m in self.attacker]


def _bits_from_indexes(indexes: Iterable[int]) -> int:
    bits = 0
    for i in indexes:
        bits |= 1 << i
    return bits


def _set_from_bits(spec: GameSpec, bits) -> frozenset:
    bits = int(bits)
    return frozenset(v for i, v in enumerate(spec.universe) if bits >> i & 1)


def _enumerate_attacker(spec: GameSpec, cap: float | None) -> list[int]:
    """All attacker subsets, optionally truncated to cost <= cap.

    Costs are monotone under inclusion, so a depth-first expansion that
    only ever adds higher-indexed nodes and prunes over-cap sets visits
    exactly the affordable subsets.
    """
    n = len(spec.universe)
    if cap is None:
        return list(range(1 << n))
    out: list[int] = []
    model = spec.cost

    def grow(bits: int, members: list[PeerAddr], next_index: int) -> None:
        out.append(bits)
        for i in range(next_index, n):
            members.append(spec.universe[i])
            if model.cost(members) <= cap + 1e-12:
                grow(bits | 1 << i, members, i + 1)
            members.pop()

    grow(0, [], 0)
    return sorted(out)


@dataclass(frozen=True)
class Equilibrium:
    sigma1: MixedStrategy
    sigma2: MixedStrategy
    value: float
    gap: float
    table: GameTable


def _minimax(payoff: np.ndarray, tol: float) -> tuple[np.ndarray, np.ndarray, float, float]:
    """Solve the matrix game: maximizing row player, minimizing column player.

    Returns (x, y, value, gap), where gap is the certified distance between
    the two players' best-response guarantees.
    """
    x = _lp_maximin(payoff)
    y = _lp_maximin(-payoff.T)
    g_row = float((x @ payoff).min())  # row player guarantees at least this
    g_col = float((payoff @ y).max())  # column player concedes at most this
    gap = g_col - g_row
    if gap > tol:
        raise RuntimeError(f"best-response certification failed: gap {gap:.3e} > {tol:.1e}")
    value = float(x @ payoff @ y)
    return x, y, value, gap


def _lp_maximin(payoff: np.ndarray) -> np.ndarray:
    """max_x min_j (x^T payoff)_j over the simplex, via one LP."""
    n, m = payoff.shape
    c = np.zeros(n + 1)
    c[0] = -1.0
    a_ub = np.hstack([np.ones((m, 1)), -payoff.T])
    b_ub = np.zeros(m)
    a_eq = np.zeros((1, n + 1))
    a_eq[0, 1:] = 1.0
    res = linprog(
        c,
        A_ub=a_ub,
        b_ub=b_ub,
        A_eq=a_eq,
        b_eq=[1.0],
        bounds=[(None, None)] + [(0.0, 1.0)] * n,
        method="highs",
    )
    if not res.success:
        raise RuntimeError(f"LP solver failed: {res.message}")
    x = np.clip(res.x[1:], 0.0, None)
    return x / x.sum()


def solve(
    spec: GameSpec,
    attacker_cost_cap: float | None = None,
    prune_dominated: bool = False,
    tol: float = 1e-6,
) -> Equilibrium:
    """Compute a Nash equilibrium of the materialized game.

    Each side's strategy comes from its own maximin LP; in a zero-sum game
    any such pair is an equilibrium.  The returned gap is the certified
    best-response slack (<= tol or the call fails).
    """
    table = GameTable.build(spec, attacker_cost_cap, prune_dominated)
    x, y, value, gap = _minimax(table.payoff, tol)
    sigma1 = MixedStrategy(tuple(table.defender_sets()), x)
    sigma2 = MixedStrategy(tuple(table.attacker_sets()), y)
    return Equilibrium(sigma1, sigma2, value, gap, table)


# ---------------------------------------------------------------------------
# equilibrium structure checks


def _strategy_as_rows(table: GameTable, sigma1: MixedStrategy) -> np.ndarray:
    """Align a defender mixed strategy with the table's row order."""
    index = {s: i for i, s in enumerate(table.defender_sets())}
    x = np.zeros(table.defender.shape[0])
    for atom, p in zip(sigma1.atoms, sigma1.probs):
        if p == 0.0:
            continue
        if atom not in index:
            raise ValueError(f"defender atom {sorted(map(str, atom))} not in S1")
        x[index[atom]] += p
    return x


def check_safety_level_persistence(
    spec: GameSpec,
    w1: float,
    w2: float,
    sigma1: MixedStrategy,
    level: float,
    tol: float = 1e-9,
    attacker_cost_cap: float | None = None,
) -> bool:
    """An l-safety-level strategy under prize W1 keeps its level under W2 <= W1.

    Checks, over every attacker pure strategy B, that
    U_{W2}(sigma1, B) >= U_{W1}(sigma1, B) >= level.
    """
    if w2 > w1:
        raise ValueError(f"persistence needs W2 <= W1, got W1={w1}, W2={w2}")
    table = GameTable.build(spec, attacker_cost_cap)
    x = _strategy_as_rows(table, sigma1)
    covered = x @ table.coverage
    u1 = table.costs - w1 * covered
    u2 = table.costs - w2 * covered
    return bool(np.all(u2 >= u1 - tol) and np.all(u1 >= level - tol))


def check_support_dichotomy(eq: Equilibrium, atol: float = 1e-8) -> bool:
    """Attacker support is either {empty set} or covers every defender set."""
    support = eq.sigma2.probs > atol
    nonempty = [int(m) != 0 for m in eq.table.attacker]
    if not any(s and ne for s, ne in zip(support, nonempty)):
        return True
    covered_rows = eq.table.coverage[:, support].sum(axis=1)
    return bool(np.all(covered_rows > 0))


def check_cost_monotonicity(eq: Equilibrium, tol: float = 1e-6) -> bool:
    """Supported attacker sets order identically by cost and covered mass.

    At an equilibrium the supported atoms equalize cost minus
    W_att * covered-defender-mass, so the orders must agree; both the
    biconditional and the quantitative identity are checked.
    """
    support = np.flatnonzero(eq.sigma2.probs > 1e-8)
    if support.size <= 1:
        return True
    x = _strategy_as_rows(eq.table, eq.sigma1)
    masses = x @ eq.table.coverage
    w = eq.table.spec.w_att
    scale = max(1.0, w, float(np.abs(eq.table.costs).max()))
    for j in support:
        for jp in support:
            dc = eq.table.costs[j] - eq.table.costs[jp]
            dm = masses[j] - masses[jp]
            if dc < -tol * scale and dm > tol:
                return False
            if dm < -tol and dc > tol * scale:
                return False
            if abs(dc - w * dm) > tol * scale:
                return False
    return True


# ---------------------------------------------------------------------------
# equivalence reduction


@dataclass(frozen=True)
class ReducedGame:
    """Defender strategy classes (same-mask swap orbits) and their payoffs."""

    table: GameTable
    classes: tuple[tuple[int, ...], ...]
    signatures: tuple[tuple, ...]
    payoff: np.ndarray

    @property
    def num_classes(self) -> int:
        return len(self.classes)

    def class_sets(self, c: int) -> list[frozenset]:
        return [_set_from_bits(self.table.spec, self.table.defender[i]) for i in self.classes[c]]


def _defender_signature(spec: GameSpec, members: frozenset) -> tuple:
    model = spec.cost
    if isinstance(model, MaskCost):
        masks = Counter(mask_of(v, model.prefix_len) for v in members)
        return tuple(sorted(masks.items()))
    # constant cost: all H-sets are interchangeable
    return (len(members),)


def reduce(
    spec: GameSpec,
    attacker_cost_cap: float | None = None,
    prune_dominated: bool = False,
) -> ReducedGame:
    """Group defender sets by mask multiset; payoff by in-class averaging."""
    table = GameTable.build(spec, attacker_cost_cap, prune_dominated)
    groups: dict[tuple, list[int]] = {}
    for i, bits in enumerate(table.defender):
        sig = _defender_signature(spec, _set_from_bits(spec, bits))
        groups.setdefault(sig, []).append(i)
    ordered = sorted(groups.items(), key=lambda kv: repr(kv[0]))
    classes = tuple(tuple(rows) for _, rows in ordered)
    signatures = tuple(sig for sig, _ in ordered)
    payoff = np.stack([table.payoff[list(rows)].mean(axis=0) for rows in classes])
    return ReducedGame(table, classes, signatures, payoff)


def strategy_to_classes(red: ReducedGame, row_probs: Sequence) -> list:
    """The mapping T: aggregate a defender strategy over each class.

    Arithmetic is whatever the inputs carry; Fraction inputs stay exact.
    """
    return [sum(row_probs[i] for i in rows) for rows in red.classes]


def strategy_from_classes(red: ReducedGame, class_probs: Sequence) -> list:
    """The mapping T^-1: spread each class's mass uniformly over its members."""
    n_rows = red.table.defender.shape[0]
    out = [0] * n_rows
    for rows, p in zip(red.classes, class_probs):
        share = p / len(rows)
        for i in rows:
            out[i] = share
    return out


@dataclass(frozen=True)
class ReductionReport:
    value_full: float
    value_reduced: float
    roundtrip_exact: bool
    pushed_gap: float
    attacker_gap: float
    safety_full: float
    safety_reduced: float
    passed: bool


def reduction_report(spec: GameSpec, tol: float = 1e-6) -> ReductionReport:
    """Solve the game both ways and verify the reduction's guarantees.

    Checks: equal values; T(T^-1(sigma-hat)) is exactly sigma-hat (in
    rational arithmetic); the pushed-back defender strategy and the
    reduced attacker strategy form an equilibrium of the full game within
    tol; the reduced safety level survives the translation.
    """
    red = reduce(spec)
    full_payoff = red.table.payoff
    x_full, _, value_full, _ = _minimax(full_payoff, tol)
    x_hat, y_hat, value_reduced, _ = _minimax(red.payoff, tol)

    hat_exact = [Fraction(float(p)) for p in x_hat]
    roundtrip = strategy_to_classes(red, strategy_from_classes(red, hat_exact))
    roundtrip_exact = roundtrip == hat_exact

    pushed = np.array(strategy_from_classes(red, [float(p) for p in x_hat]))
    safety_full = float((pushed @ full_payoff).min())
    safety_reduced = float((x_hat @ red.payoff).min())
    pushed_gap = value_full - safety_full
    attacker_gap = float((full_payoff @ y_hat).max()) - value_full

    passed = (
        abs(value_full - value_reduced) <= tol
        and roundtrip_exact
        and pushed_gap <= tol
        and attacker_gap <= tol
        and safety_full >= safety_reduced - tol
    )
    return ReductionReport(
        value_full=value_full,
        value_reduced=value_reduced,
        roundtrip_exact=roundtrip_exact,
        pushed_gap=pushed_gap,
        attacker_gap=attacker_gap,
        safety_full=safety_full,
        safety_reduced=safety_reduced,
        passed=passed,
    )


def check_reduction_value(spec: GameSpec, tol: float = 1e-6) -> bool:
    return reduction_report(spec, tol).passed


# ---------------------------------------------------------------------------
# JSON interfaces


def game_spec_from_json(obj: Mapping) -> GameSpec:
    universe = tuple(parse_addr(s) for s in obj["universe"])
    return GameSpec(
        universe=universe,
        h=int(obj["H"]),
        w_att=float(obj["W_att"]),
        cost=cost_model_from_config(obj["cost"]),
    )


def game_spec_to_json(spec: GameSpec) -> dict:
    return {
        "universe": [str(v) for v in spec.universe],
        "H": spec.h,
        "W_att": spec.w_att,
        "cost": cost_model_to_config(spec.cost),
    }


def _support_json(sigma: MixedStrategy) -> list[dict]:
    entries = []
    for atom, p in sigma.support(atol=1e-9):
        entries.append({"set": sorted(str(v) for v in atom), "prob": p})
    entries.sort(key=lambda e: (-e["prob"], e["set"]))
    return entries


def equilibrium_to_json(eq: Equilibrium) -> dict:
    return {
        "value": eq.value,
        "gap": eq.gap,
        "defender": _support_json(eq.sigma1),
        "attacker": _support_json(eq.sigma2),
    }
