"""The restricted defender game over mask-size classes.

Instead of mixing over all H-subsets, the restricted defender draws each
of its H connections independently: first a mask-size class a with
probability p_a, then a uniform node inside that class.  The attacker
responds with a per-class corruption allocation x_a.  This module gives
the exact success probability of that interaction, the analytic
lower-bound on defender utility, the attacker's best response, and the
resulting safety level.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from itertools import product as iter_product
from typing import IO, Mapping, Sequence

from .addr import MaskCensus
from .cost import InfeasibleAllocationError, MaskCost, avg_node_cost, min_cost_for_allocation

__all__ = [
    "RestrictedDefender",
    "SafetyReport",
    "success_probability",
    "analytic_lower_bound",
    "attacker_best_response",
    "safety_level",
    "write_reports_csv",
    "EXHAUSTIVE_LIMIT",
]

# Full allocation grids up to this many cells are enumerated outright.
EXHAUSTIVE_LIMIT = 10**6


@dataclass(frozen=True)
class RestrictedDefender:
    """Per-connection class weights p_a and the connection count H."""

    p: Mapping[int, float]
    h: int

    def __post_init__(self):
        if self.h < 1:
            raise ValueError(f"H must be at least 1, got {self.h}")
        total = 0.0
        for a, p_a in self.p.items():
            if a < 1:
                raise ValueError(f"mask size must be at least 1, got {a}")
            if p_a < 0:
                raise ValueError(f"weight p_{a} must be nonnegative, got {p_a}")
            total += p_a
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"class weights sum to {total}, not 1")

    @classmethod
    def uniform_over_masks(cls, census: MaskCensus, h: int) -> "RestrictedDefender":
        """Weight each size class by its mask count: a uniform draw of masks."""
        by_size = census.num_masks_by_size
        total = sum(by_size.values())
        if total == 0:
            raise ValueError("census is empty")
        return cls({a: k / total for a, k in by_size.items()}, h)

    def check_supported(self, census: MaskCensus) -> None:
        hist = census.size_histogram
        for a, p_a in self.p.items():
            if p_a > 0 and a not in hist:
                raise ValueError(f"defender weight on size {a}, absent from census")


def _check_allocation(alloc: Mapping[int, int], census: MaskCensus) -> None:
    hist = census.size_histogram
    for a, x_a in alloc.items():
        if x_a < 0:
            raise InfeasibleAllocationError(f"negative allocation x_{a}={x_a}")
        if x_a > hist.get(a, 0):
            raise InfeasibleAllocationError(
                f"allocation x_{a}={x_a} exceeds class mass M_{a}={hist.get(a, 0)}"
            )


def success_probability(
    defender: RestrictedDefender, alloc: Mapping[int, int], census: MaskCensus
) -> float:
    """Exact P(all H connections corrupted) = (sum_a p_a x_a/M_a)^H."""
    defender.check_supported(census)
    _check_allocation(alloc, census)
    hist = census.size_histogram
    per_draw = sum(
        p_a * alloc.get(a, 0) / hist[a] for a, p_a in defender.p.items() if p_a > 0
    )
    return per_draw**defender.h


def analytic_lower_bound(
    defender: RestrictedDefender,
    alloc: Mapping[int, int],
    census: MaskCensus,
    model: MaskCost,
    w_att: float,
    substitute_empty_classes: bool = False,
) -> float:
    """Closed-form lower bound: sum_a x_a*avg_a - W_att * prod of class factors.

    Classes with x_a > 0 contribute x_a/M_a.  For x_a = 0 the default
    contributes factor 1, which only weakens the bound and never
    overstates safety.  With substitute_empty_classes, an empty class
    instead contributes (1 - E)^(1/E) where E = H*p_a is the expected
    number of connections drawn from it; undefined negative bases clamp
    the factor to 0.  That substitution reads a random exponent at its
    expectation, which is not the only defensible reading, so it stays
    quarantined behind the flag.
    """
    defender.check_supported(census)
    _check_allocation(alloc, census)
    hist = census.size_histogram
    invested = sum(x_a * avg_node_cost(model, a) for a, x_a in alloc.items())
    factor = 1.0
    for a, m_a in hist.items():
        x_a = alloc.get(a, 0)
        if x_a > 0:
            factor *= x_a / m_a
        elif substitute_empty_classes:
            e = defender.h * defender.p.get(a, 0.0)
            if e == 0:
                pass  # class never drawn, factor 1
            elif e >= 1:
                factor = 0.0
            else:
                factor *= (1.0 - e) ** (1.0 / e)
    return invested - w_att * factor


@dataclass(frozen=True)
class SafetyReport:
    """One attacker allocation evaluated from the defender's side."""

    allocation: dict[int, int]
    investment: float
    success_prob: float
    expected_utility: float
    bound: float | None = None


def _evaluate(
    defender: RestrictedDefender,
    alloc: dict[int, int],
    census: MaskCensus,
    model: MaskCost,
    w_att: float,
) -> SafetyReport:
    invested = min_cost_for_allocation(model, alloc, census)
    success = success_probability(defender, alloc, census)
    bound = analytic_lower_bound(defender, alloc, census, model, w_att)
    return SafetyReport(
        allocation=dict(sorted(alloc.items())),
        investment=invested,
        success_prob=success,
        expected_utility=invested - w_att * success,
        bound=bound,
    )


def _sweep_candidates(
    defender: RestrictedDefender, census: MaskCensus, model: MaskCost
) -> list[dict[int, int]]:
    """Heuristic allocation family for large censuses.

    The success term is convex in the corrupted fractions, so the
    defender's utility is concave and minimizers sit at extreme points:
    equal-fraction allocations across classes (the response structure the
    analysis predicts), greedy fills ordered by marginal success per coin,
    and the full buyout.
    """
    hist = census.size_histogram
    sizes = sorted(hist)
    candidates: list[dict[int, int]] = [{}]
    for i in range(1, 201):
        f = i / 200
        candidates.append({a: round(f * hist[a]) for a in sizes})
    # node-granularity greedy prefixes: fill the class with the best
    # per-draw gain per unit cost first (mask-amortized node price)
    density = {
        a: defender.p.get(a, 0.0) / hist[a] / avg_node_cost(model, a) for a in sizes
    }
    order = sorted(sizes, key=lambda a: (-density[a], a))
    grown: dict[int, int] = {}
    for a in order:
        for x in range(1, hist[a] + 1):
            grown[a] = x
            candidates.append(dict(grown))
    candidates.append({a: hist[a] for a in sizes})
    return candidates


def attacker_best_response(
    defender: RestrictedDefender,
    census: MaskCensus,
    model: MaskCost,
    w_att: float,
    budget: float | None = None,
    method: str = "auto",
) -> SafetyReport:
    """Allocation minimizing the defender's expected utility.

    Small allocation grids (prod of (M_a + 1) <= EXHAUSTIVE_LIMIT) are
    enumerated exhaustively; larger censuses use the sweep family.  Ties
    break toward lower investment, then lexicographic allocation, so the
    result is deterministic.  A budget caps the allocation's exact cost.
    """
    defender.check_supported(census)
    if method not in ("auto", "exhaustive", "sweep"):
        raise ValueError(f"unknown method {method!r}")
    hist = census.size_histogram
    sizes = sorted(hist)
    grid_cells = math.prod(hist[a] + 1 for a in sizes)
    if method == "exhaustive" or (method == "auto" and grid_cells <= EXHAUSTIVE_LIMIT):
        candidates = (
            dict(zip(sizes, combo))
            for combo in iter_product(*(range(hist[a] + 1) for a in sizes))
        )
    else:
        candidates = iter(_sweep_candidates(defender, census, model))

    best: SafetyReport | None = None
    best_key: tuple | None = None
    seen: set[tuple] = set()
    for alloc in candidates:
        alloc = {a: x for a, x in alloc.items() if x > 0}
        fingerprint = tuple(sorted(alloc.items()))
        if fingerprint in seen:
            continue
        seen.add(fingerprint)
        report = _evaluate(defender, alloc, census, model, w_att)
        if budget is not None and report.investment > budget + 1e-9:
            continue
        key = (report.expected_utility, report.investment, fingerprint)
        if best_key is None or key < best_key:
            best, best_key = report, key
    assert best is not None  # the empty allocation always qualifies
    return best


def safety_level(
    defender: RestrictedDefender,
    census: MaskCensus,
    model: MaskCost,
    w_att: float,
) -> float:
    """The defender's guaranteed expected utility against any allocation."""
    return attacker_best_response(defender, census, model, w_att).expected_utility


def write_reports_csv(rows: Sequence[tuple[float, SafetyReport]], fh: IO[str]) -> None:
    """Budget-sweep output: budget,investment,success_prob,expected_utility,bound."""
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["budget", "investment", "success_prob", "expected_utility", "bound"])
    for budget, report in rows:
        writer.writerow(
            [
                repr(float(budget)),
                repr(report.investment),
                repr(report.success_prob),
                repr(report.expected_utility),
                "" if report.bound is None else repr(report.bound),
            ]
        )
