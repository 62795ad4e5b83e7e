"""Attack-success-vs-investment benchmark across defender policies.

Three defenders face the same announcement workload: a naive
uniform-eviction buffer, the same buffer behind a Bloom filter, and the
mask-bucketed defender built on the peer buffer.  Per budget, the
attacker spends according to the mask cost model (best-response census
corruption against the bucketed defender, maximal address flooding
against the naive ones), announcements are interleaved with a
retransmission factor on attacker addresses, and the success frequency
of full isolation is estimated over seeded Monte Carlo trials.

Streams are reduced before ingestion where that is provably lossless:
for the filtered policies a repeat announcement is a no-op (the filter
remembers it), so only the first occurrence of each address matters, and
the first-occurrence order of a uniformly shuffled multiset is exactly
the weighted order obtained by sorting u^(1/w) keys.  The unfiltered
naive buffer genuinely re-admits evicted addresses, so it ingests the
full shuffled multiset through a compiled kernel.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from ipaddress import IPv4Address
from typing import IO, Iterable, Mapping, Sequence, Union

import numpy as np

from .addr import MaskCensus, MaskId, PeerAddr
from .bloom import probe_matrix
from .buffer import BucketConfig, BucketShortfallError, PeerBuffer, mask_key
from .cost import MaskCost, cost_model_from_config, cost_model_to_config
from .safety import RestrictedDefender, attacker_best_response, success_probability

__all__ = [
    "NaiveUniform",
    "NaiveWithFilter",
    "MaskBucketed",
    "DefenderPolicy",
    "AttackScenario",
    "CurvePoint",
    "AttackOutcomeCurve",
    "PolicyComparison",
    "SimulationJob",
    "run_scenario",
    "compare_policies",
    "synthetic_census",
    "job_from_json",
    "job_to_json",
    "write_curves_csv",
]

_REPLAN_LIMIT = 100


@dataclass(frozen=True)
class NaiveUniform:
    """Fixed-capacity set buffer with uniform-random eviction, no filter."""

    capacity: int = 20480

    name = "naive"


@dataclass(frozen=True)
class NaiveWithFilter:
    """The naive buffer behind a Bloom filter that drops repeats forever."""

    capacity: int = 20480
    bloom_bytes: int = 1 << 16
    bloom_hashes: int = 7

    name = "naive_filtered"


@dataclass(frozen=True)
class MaskBucketed:
    """The peer-buffer defender: mask buckets plus per-class selection.

    weights defaults to the uniform-over-masks policy for the scenario's
    census.
    """

    bucket_size: int = 8
    bloom_bytes: int = 1 << 16
    bloom_hashes: int = 7
    weights: Mapping[int, float] | None = None

    name = "bucketed"


DefenderPolicy = Union[NaiveUniform, NaiveWithFilter, MaskBucketed]

_POLICY_CODES = {"naive": 0, "naive_filtered": 1, "bucketed": 2}


@dataclass(frozen=True)
class AttackScenario:
    """Shared workload: background census, prices, budgets, stream shape."""

    census: MaskCensus
    cost: MaskCost
    w_att: float
    budgets: tuple[float, ...]
    retransmission_factor: int = 1
    h: int = 8
    trials: int = 1000
    seed: int = 0
    offline_prob: float = 0.0
    max_flood_addresses: int = 65536

    def __post_init__(self):
        object.__setattr__(self, "budgets", tuple(float(b) for b in self.budgets))
        if len(self.census.counts) == 0:
            raise ValueError("scenario census is empty")
        if self.census.prefix_len != self.cost.prefix_len:
            raise ValueError("census and cost model disagree on prefix_len")
        if any(b < 0 for b in self.budgets):
            raise ValueError("budgets must be nonnegative")
        if list(self.budgets) != sorted(self.budgets):
            raise ValueError("budgets must be sorted ascending")
        if self.retransmission_factor < 1:
            raise ValueError("retransmission_factor must be at least 1")
        if self.h < 1:
            raise ValueError("H must be at least 1")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if not 0.0 <= self.offline_prob < 1.0:
            raise ValueError("offline_prob must be in [0, 1)")


@dataclass(frozen=True)
class CurvePoint:
    budget: float
    success: float
    stderr: float


@dataclass(frozen=True)
class AttackOutcomeCurve:
    policy: str
    points: tuple[CurvePoint, ...]

    def successes(self) -> list[float]:
        return [p.success for p in self.points]


def synthetic_census(
    masks: Sequence[tuple[int, int]], prefix_len: int = 16
) -> MaskCensus:
    """Build a census of (size, count) mask groups on synthetic prefixes."""
    step = 1 << (32 - prefix_len)
    base = int(IPv4Address("10.0.0.0"))
    counts: dict[MaskId, int] = {}
    i = 0
    for size, count in masks:
        if size < 1 or count < 0:
            raise ValueError(f"bad mask group size={size} count={count}")
        if size >= step:
            raise ValueError(f"mask of {size} nodes exceeds /{prefix_len} host space")
        for _ in range(count):
            counts[MaskId(base + i * step, prefix_len)] = size
            i += 1
    if not counts:
        raise ValueError("census needs at least one mask")
    return MaskCensus(counts, prefix_len)


class _World:
    """Concrete addresses for a scenario's census, with id bookkeeping."""

    def __init__(self, scenario: AttackScenario):
        self.scenario = scenario
        cen = scenario.census
        self.masks = sorted(cen.counts)
        self.mask_addrs: dict[MaskId, list[PeerAddr]] = {}
        honest: list[PeerAddr] = []
        for mask in self.masks:
            addrs = [IPv4Address(mask.prefix + j) for j in range(cen.counts[mask])]
            self.mask_addrs[mask] = addrs
            honest.extend(addrs)
        self.honest = honest
        self.honest_index = {a: i for i, a in enumerate(honest)}
        self.buyout = scenario.cost.cost(honest)
        self.cheapest_mask = min(
            scenario.cost.c_new + a * scenario.cost.c_node
            for a in cen.size_histogram
        )

    def flood_addresses(self, count: int) -> list[PeerAddr]:
        """Fresh addresses in masks disjoint from the census, deterministic."""
        if count == 0:
            return []
        plen = self.scenario.census.prefix_len
        step = 1 << (32 - plen)
        taken = set(self.scenario.census.counts)
        out: list[PeerAddr] = []
        prefix = int(IPv4Address("192.0.0.0"))
        while len(out) < count:
            if prefix >= 1 << 32:
                raise RuntimeError("flood address space exhausted")
            mask = MaskId(prefix, plen)
            prefix += step
            if mask in taken:
                continue
            in_mask = min(count - len(out), step)
            out.extend(IPv4Address(mask.prefix + j) for j in range(in_mask))
        return out


@dataclass(frozen=True)
class _Assets:
    """What the attacker owns at one budget."""

    corrupted: tuple[PeerAddr, ...]  # census nodes bought
    minted: tuple[PeerAddr, ...]  # fresh flood addresses
    allocation: dict[int, int]  # per-class corruption counts


def _flood_assets(world: _World, budget: float) -> _Assets:
    """Naive-policy attacker: buy out the census if affordable, then mint
    as many fresh addresses as the remaining budget allows."""
    scenario = world.scenario
    model = scenario.cost
    corrupted: tuple[PeerAddr, ...] = ()
    leftover = budget
    if budget >= world.buyout - 1e-9:
        corrupted = tuple(world.honest)
        leftover = budget - world.buyout
    step = 1 << (32 - scenario.census.prefix_len)
    best = 0
    m = 1
    while m * model.c_new <= leftover + 1e-9:
        rem = leftover - m * model.c_new
        d = m * step if model.c_node == 0 else int(rem // model.c_node)
        d = min(d, m * step, scenario.max_flood_addresses)
        best = max(best, d)
        if d >= scenario.max_flood_addresses:
            break
        m += 1
    minted = tuple(world.flood_addresses(best))
    alloc = dict(world.scenario.census.size_histogram) if corrupted else {}
    return _Assets(corrupted, minted, alloc)


def _bucketed_assets(
    world: _World, budget: float, defender: RestrictedDefender
) -> _Assets:
    """Bucketed-policy attacker: best-response corruption of census nodes.

    Fresh masks would land in buckets the plan never requests, so minting
    is pointless against this defender; the budget goes to corruption.
    """
    scenario = world.scenario
    report = attacker_best_response(
        defender, scenario.census, scenario.cost, scenario.w_att, budget=budget
    )
    corrupted: list[PeerAddr] = []
    for a, x_a in report.allocation.items():
        remaining = x_a
        for mask in scenario.census.masks_of_size(a):
            if remaining == 0:
                break
            take = min(remaining, a)
            corrupted.extend(world.mask_addrs[mask][:take])
            remaining -= take
    return _Assets(tuple(corrupted), (), report.allocation)


def _trial_rng(
    scenario: AttackScenario, policy_name: str, budget_index: int, trial: int
) -> np.random.Generator:
    seq = np.random.SeedSequence(
        (scenario.seed, _POLICY_CODES[policy_name], budget_index, trial)
    )
    return np.random.default_rng(seq)


def _first_occurrence_order(
    rng: np.random.Generator, weights: np.ndarray
) -> np.ndarray:
    """First-occurrence order of a shuffled multiset with these counts.

    Sorting ids by u^(1/w) descending (u uniform) yields exactly that law,
    so heavily retransmitted ids surface early without materializing the
    multiset.
    """
    u = rng.random(weights.shape[0])
    with np.errstate(divide="ignore"):
        keys = np.log(u) / weights
    return np.argsort(-keys)


def _alive_mask(
    rng: np.random.Generator, attacker_owned: np.ndarray, offline_prob: float
) -> np.ndarray:
    """Per-trial liveness: honest nodes churn out, attacker nodes never do."""
    if offline_prob == 0.0:
        return np.ones(attacker_owned.shape[0], dtype=bool)
    alive = rng.random(attacker_owned.shape[0]) >= offline_prob
    return alive | attacker_owned


def _select_success(
    rng: np.random.Generator,
    final_ids: np.ndarray,
    alive: np.ndarray,
    attacker_owned: np.ndarray,
    h: int,
) -> bool:
    """Uniform H-draw from the live buffer; success = all attacker-owned.

    A buffer that cannot supply H live records counts as no success: the
    defender failed to connect, not to an attacker.
    """
    eligible = final_ids[alive[final_ids]]
    if eligible.shape[0] < h:
        return False
    chosen = eligible[rng.choice(eligible.shape[0], size=h, replace=False)]
    return bool(attacker_owned[chosen].all())


def _run_naive(
    policy: NaiveUniform | NaiveWithFilter, scenario: AttackScenario, world: _World
) -> AttackOutcomeCurve:
    from . import _kernels  # deferred: compiling kernels is not free

    filtered = isinstance(policy, NaiveWithFilter)
    points = []
    for bi, budget in enumerate(scenario.budgets):
        assets = _flood_assets(world, budget)
        n_honest = len(world.honest)
        ids_addrs = list(world.honest) + list(assets.minted)
        n_ids = len(ids_addrs)
        attacker_owned = np.zeros(n_ids, dtype=bool)
        for a in assets.corrupted:
            attacker_owned[world.honest_index[a]] = True
        attacker_owned[n_honest:] = True
        weights = np.where(attacker_owned, scenario.retransmission_factor, 1).astype(
            np.int64
        )
        if filtered:
            ints = np.array([int(a) for a in ids_addrs], dtype=np.uint64)
        else:
            base_stream = np.repeat(np.arange(n_ids, dtype=np.int64), weights)
        wins = 0
        for trial in range(scenario.trials):
            rng = _trial_rng(scenario, policy.name, bi, trial)
            alive = _alive_mask(rng, attacker_owned, scenario.offline_prob)
            kernel_seed = np.uint64(rng.integers(1, 1 << 63))
            if filtered:
                order = _first_occurrence_order(rng, weights)
                probes = probe_matrix(
                    ints,
                    8 * policy.bloom_bytes,
                    policy.bloom_hashes,
                    seed=int(rng.integers(1 << 63)),
                )
                final = _kernels.filtered_ingest(
                    order, probes, policy.bloom_bytes, policy.capacity, kernel_seed
                )
            else:
                stream = rng.permutation(base_stream)
                final = _kernels.naive_ingest(stream, n_ids, policy.capacity, kernel_seed)
            if _select_success(rng, final, alive, attacker_owned, scenario.h):
                wins += 1
        f = wins / scenario.trials
        points.append(CurvePoint(budget, f, math.sqrt(f * (1 - f) / scenario.trials)))
    return AttackOutcomeCurve(policy.name, tuple(points))


def _run_bucketed(
    policy: MaskBucketed, scenario: AttackScenario, world: _World
) -> AttackOutcomeCurve:
    census = scenario.census
    if policy.weights is None:
        defender = RestrictedDefender.uniform_over_masks(census, scenario.h)
    else:
        defender = RestrictedDefender(dict(policy.weights), scenario.h)
    sizes = sorted(a for a, p in defender.p.items() if p > 0)
    size_arr = np.array(sizes)
    p_arr = np.array([defender.p[a] for a in sizes])
    p_arr = p_arr / p_arr.sum()
    masks_by_size = {a: census.masks_of_size(a) for a in sizes}
    plen = census.prefix_len
    n_honest = len(world.honest)
    points = []
    for bi, budget in enumerate(scenario.budgets):
        assets = _bucketed_assets(world, budget, defender)
        corrupted_set = set(assets.corrupted)
        attacker_owned = np.zeros(n_honest, dtype=bool)
        for a in assets.corrupted:
            attacker_owned[world.honest_index[a]] = True
        weights = np.where(attacker_owned, scenario.retransmission_factor, 1).astype(
            np.int64
        )
        wins = 0
        for trial in range(scenario.trials):
            rng = _trial_rng(scenario, policy.name, bi, trial)
            alive = _alive_mask(rng, attacker_owned, scenario.offline_prob)
            order = _first_occurrence_order(rng, weights)
            config = BucketConfig(
                equivalence_key=mask_key(plen),
                bucket_size=policy.bucket_size,
                bloom_bytes=policy.bloom_bytes,
                bloom_hashes=policy.bloom_hashes,
                seed=int(rng.integers(1 << 63)),
            )
            buf = PeerBuffer(config)
            honest = world.honest
            for i in order:
                buf.on_announce(honest[i])
            if scenario.offline_prob == 0.0:
                alive_pred = lambda addr: True
            else:
                dead = {honest[i] for i in np.flatnonzero(~alive)}
                alive_pred = lambda addr: addr not in dead
            success = False
            for _ in range(_REPLAN_LIMIT):
                class_draws = rng.choice(size_arr, size=scenario.h, p=p_arr)
                plan = []
                for a in class_draws:
                    group = masks_by_size[int(a)]
                    plan.append(group[int(rng.integers(len(group)))])
                try:
                    chosen = buf.select_with_staleness(plan, alive_pred)
                except BucketShortfallError:
                    continue
                success = chosen <= corrupted_set
                break
            if success:
                wins += 1
        f = wins / scenario.trials
        points.append(CurvePoint(budget, f, math.sqrt(f * (1 - f) / scenario.trials)))
    return AttackOutcomeCurve(policy.name, tuple(points))


def run_scenario(policy: DefenderPolicy, scenario: AttackScenario) -> AttackOutcomeCurve:
    """Success-vs-budget curve for one policy. Deterministic given seed."""
    world = _World(scenario)
    if isinstance(policy, (NaiveUniform, NaiveWithFilter)):
        if policy.capacity < scenario.h:
            raise ValueError(
                f"capacity {policy.capacity} cannot serve H={scenario.h} connections"
            )
        return _run_naive(policy, scenario, world)
    if isinstance(policy, MaskBucketed):
        return _run_bucketed(policy, scenario, world)
    raise TypeError(f"unknown policy {policy!r}")


def analytic_bucketed_success(
    policy: MaskBucketed, scenario: AttackScenario, budget: float
) -> float:
    """The restricted-game prediction for the bucketed policy at one budget."""
    if policy.weights is None:
        defender = RestrictedDefender.uniform_over_masks(scenario.census, scenario.h)
    else:
        defender = RestrictedDefender(dict(policy.weights), scenario.h)
    report = attacker_best_response(
        defender, scenario.census, scenario.cost, scenario.w_att, budget=budget
    )
    return success_probability(defender, report.allocation, scenario.census)


@dataclass(frozen=True)
class PolicyComparison:
    curves: dict[str, AttackOutcomeCurve]
    budgets: tuple[float, ...]
    cheapest_mask_cost: float
    buyout_cost: float
    monotone_ok: dict[str, bool]
    dominance_ok: bool
    flood_budgets: tuple[float, ...]
    convergence_ok: bool

    def lines(self) -> list[str]:
        out = [
            f"budgets: {', '.join(f'{b:g}' for b in self.budgets)}",
            f"cheapest mask cost: {self.cheapest_mask_cost:g}",
            f"census buyout cost: {self.buyout_cost:g}",
        ]
        for name, curve in self.curves.items():
            vals = ", ".join(f"{p.success:.4f}" for p in curve.points)
            out.append(f"{name}: {vals}")
        for name, ok in self.monotone_ok.items():
            out.append(f"monotone[{name}]: {'pass' if ok else 'FAIL'}")
        out.append(f"bucketed dominance inside (cheapest, buyout): "
                   f"{'pass' if self.dominance_ok else 'FAIL'}")
        if self.flood_budgets:
            pretty = ", ".join(f"{b:g}" for b in self.flood_budgets)
            out.append(f"flood overwhelms naive while bucketed holds at: {pretty}")
        else:
            out.append("flood overwhelms naive while bucketed holds at: (none)")
        out.append(
            "curves converge at census buyout: "
            + ("pass" if self.convergence_ok else "FAIL")
        )
        return out


def _monotone_within_noise(curve: AttackOutcomeCurve) -> bool:
    for prev, cur in zip(curve.points, curve.points[1:]):
        slack = 3.0 * math.hypot(prev.stderr, cur.stderr)
        if cur.success < prev.success - slack:
            return False
    return True


def compare_policies(
    scenario: AttackScenario, policies: Sequence[DefenderPolicy] | None = None
) -> PolicyComparison:
    """Run all policies on the shared scenario and grade the claims.

    Checks reported: per-policy monotonicity in budget, bucketed success
    at or below every naive success on budgets strictly between the
    cheapest mask and the census buyout (within noise), and convergence
    of the curves once the attacker can buy the whole census.
    """
    if policies is None:
        policies = (NaiveUniform(), NaiveWithFilter(), MaskBucketed())
    world = _World(scenario)
    curves = {p.name: run_scenario(p, scenario) for p in policies}
    monotone = {name: _monotone_within_noise(c) for name, c in curves.items()}

    bucketed = curves.get("bucketed")
    naive_curves = [c for n, c in curves.items() if n != "bucketed"]
    dominance_ok = True
    flood_budgets: list[float] = []
    convergence_ok = True
    for i, budget in enumerate(scenario.budgets):
        if bucketed is None or not naive_curves:
            break
        b_pt = bucketed.points[i]
        if world.cheapest_mask < budget < world.buyout:
            for curve in naive_curves:
                n_pt = curve.points[i]
                slack = 3.0 * math.hypot(b_pt.stderr, n_pt.stderr)
                if b_pt.success > n_pt.success + slack:
                    dominance_ok = False
        if "naive" in curves:
            n_pt = curves["naive"].points[i]
            if n_pt.success >= 0.99 and b_pt.success <= 0.01:
                flood_budgets.append(budget)
        if budget >= world.buyout:
            for curve in naive_curves:
                n_pt = curve.points[i]
                slack = max(3.0 * math.hypot(b_pt.stderr, n_pt.stderr), 1e-12)
                if abs(b_pt.success - n_pt.success) > slack:
                    convergence_ok = False
    return PolicyComparison(
        curves=curves,
        budgets=scenario.budgets,
        cheapest_mask_cost=world.cheapest_mask,
        buyout_cost=world.buyout,
        monotone_ok=monotone,
        dominance_ok=dominance_ok,
        flood_budgets=tuple(flood_budgets),
        convergence_ok=convergence_ok,
    )


# ---------------------------------------------------------------------------
# JSON / CSV interfaces


@dataclass(frozen=True)
class SimulationJob:
    scenario: AttackScenario
    policies: tuple[DefenderPolicy, ...]


def _policy_from_json(name: str, block: Mapping) -> DefenderPolicy:
    if name == "naive":
        return NaiveUniform(capacity=int(block.get("capacity", 20480)))
    if name == "naive_filtered":
        return NaiveWithFilter(
            capacity=int(block.get("capacity", 20480)),
            bloom_bytes=int(block.get("bloom_bytes", 1 << 16)),
            bloom_hashes=int(block.get("bloom_hashes", 7)),
        )
    if name == "bucketed":
        weights = block.get("weights")
        if weights is not None:
            weights = {int(a): float(p) for a, p in weights.items()}
        return MaskBucketed(
            bucket_size=int(block.get("bucket_size", 8)),
            bloom_bytes=int(block.get("bloom_bytes", 1 << 16)),
            bloom_hashes=int(block.get("bloom_hashes", 7)),
            weights=weights,
        )
    raise ValueError(f"unknown policy {name!r}")


def _policy_to_json(policy: DefenderPolicy) -> dict:
    if isinstance(policy, NaiveUniform):
        return {"capacity": policy.capacity}
    if isinstance(policy, NaiveWithFilter):
        return {
            "capacity": policy.capacity,
            "bloom_bytes": policy.bloom_bytes,
            "bloom_hashes": policy.bloom_hashes,
        }
    block: dict = {
        "bucket_size": policy.bucket_size,
        "bloom_bytes": policy.bloom_bytes,
        "bloom_hashes": policy.bloom_hashes,
    }
    if policy.weights is not None:
        block["weights"] = {str(a): p for a, p in sorted(policy.weights.items())}
    return block


def job_from_json(obj: Mapping) -> SimulationJob:
    """Scenario file layout: census mask groups, cost block, attack knobs."""
    cen_block = obj["census"]
    prefix_len = int(cen_block.get("prefix_len", 16))
    census = synthetic_census(
        [(int(g["size"]), int(g["count"])) for g in cen_block["masks"]],
        prefix_len=prefix_len,
    )
    model = cost_model_from_config(obj["cost"])
    if not isinstance(model, MaskCost):
        raise ValueError("simulation scenarios need a mask cost model")
    scenario = AttackScenario(
        census=census,
        cost=model,
        w_att=float(obj["W_att"]),
        budgets=tuple(obj["budgets"]),
        retransmission_factor=int(obj.get("retransmission_factor", 1)),
        h=int(obj.get("H", 8)),
        trials=int(obj.get("trials", 1000)),
        seed=int(obj.get("seed", 0)),
        offline_prob=float(obj.get("offline_prob", 0.0)),
        max_flood_addresses=int(obj.get("max_flood_addresses", 65536)),
    )
    pol_block = obj.get("policies")
    if pol_block is None:
        policies: tuple[DefenderPolicy, ...] = (
            NaiveUniform(),
            NaiveWithFilter(),
            MaskBucketed(),
        )
    else:
        policies = tuple(_policy_from_json(n, b) for n, b in pol_block.items())
    return SimulationJob(scenario, policies)


def job_to_json(job: SimulationJob) -> dict:
    scenario = job.scenario
    groups = [
        {"size": a, "count": k}
        for a, k in sorted(scenario.census.num_masks_by_size.items())
    ]
    return {
        "census": {"masks": groups, "prefix_len": scenario.census.prefix_len},
        "cost": cost_model_to_config(scenario.cost),
        "W_att": scenario.w_att,
        "budgets": list(scenario.budgets),
        "retransmission_factor": scenario.retransmission_factor,
        "H": scenario.h,
        "trials": scenario.trials,
        "seed": scenario.seed,
        "offline_prob": scenario.offline_prob,
        "max_flood_addresses": scenario.max_flood_addresses,
        "policies": {p.name: _policy_to_json(p) for p in job.policies},
    }


def write_curves_csv(curves: Iterable[AttackOutcomeCurve], fh: IO[str]) -> None:
    """Plot-ready curve rows: policy,budget,success,stderr."""
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["policy", "budget", "success", "stderr"])
    for curve in curves:
        for p in curve.points:
            writer.writerow([curve.policy, repr(p.budget), repr(p.success), repr(p.stderr)])
