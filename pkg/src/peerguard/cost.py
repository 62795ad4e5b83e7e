"""Attacker acquisition-cost models C : 2^V -> R>=0.

Two variants: a flat per-node price, and the IP-mask model where the
attacker pays once per address range and then per node inside it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Union

from .addr import DEFAULT_PREFIX_LEN, MaskCensus, PeerAddr, mask_of

__all__ = [
    "ConstantCost",
    "MaskCost",
    "CostModel",
    "InfeasibleAllocationError",
    "avg_node_cost",
    "min_cost_for_allocation",
    "cost_model_from_config",
    "cost_model_to_config",
    "DEFAULT_MASK_COST",
]


@dataclass(frozen=True)
class ConstantCost:
    """Every node costs the same: C(U) = c * |U|."""

    c: float

    def __post_init__(self):
        if self.c < 0:
            raise ValueError(f"per-node cost must be nonnegative, got {self.c}")

    def cost(self, peers: Iterable[PeerAddr]) -> float:
        return self.c * len(set(peers))


@dataclass(frozen=True)
class MaskCost:
    """Mask-based pricing: c_new per distinct address range, c_node per node."""

    c_new: float
    c_node: float
    prefix_len: int = DEFAULT_PREFIX_LEN

    def __post_init__(self):
        if self.c_new < 0 or self.c_node < 0:
            raise ValueError(
                f"costs must be nonnegative, got c_new={self.c_new} c_node={self.c_node}"
            )
        if not 0 < self.prefix_len <= 32:
            raise ValueError(f"prefix_len must be in 1..32, got {self.prefix_len}")

    def cost(self, peers: Iterable[PeerAddr]) -> float:
        distinct = set(peers)
        masks = {mask_of(a, self.prefix_len) for a in distinct}
        return self.c_new * len(masks) + self.c_node * len(distinct)


CostModel = Union[ConstantCost, MaskCost]

# Non-authoritative convenience fixture; real deployments should price
# ranges and nodes from their own market data.
DEFAULT_MASK_COST = MaskCost(c_new=10.0, c_node=1.0)


class InfeasibleAllocationError(ValueError):
    """An allocation asks for more nodes than a size class contains."""


def avg_node_cost(model: MaskCost, a: int) -> float:
    """Average per-node cost inside a size-a mask: (c_new + a*c_node)/a."""
    if a < 1:
        raise ValueError(f"mask size must be at least 1, got {a}")
    return (model.c_new + a * model.c_node) / a


def min_cost_for_allocation(
    model: MaskCost, x: Mapping[int, int], census: MaskCensus
) -> float:
    """Cheapest cost of owning x_a nodes within size-a masks, per class.

    Packing whole masks first is optimal, so the class cost is
    c_new * ceil(x_a/a) + c_node * x_a.  The result dominates the average
    bound sum(x_a * avg_a), with equality exactly when every a divides x_a.
    """
    hist = census.size_histogram
    total = 0.0
    for a, x_a in x.items():
        if x_a < 0:
            raise InfeasibleAllocationError(f"negative allocation x_{a}={x_a}")
        if x_a == 0:
            continue
        m_a = hist.get(a, 0)
        if x_a > m_a:
            raise InfeasibleAllocationError(
                f"allocation x_{a}={x_a} exceeds class mass M_{a}={m_a}"
            )
        total += model.c_new * math.ceil(x_a / a) + model.c_node * x_a
    return total


def cost_model_from_config(block: Mapping) -> CostModel:
    """Build a cost model from its CLI config block."""
    variant = block.get("variant")
    if variant == "constant":
        return ConstantCost(c=float(block["c"]))
    if variant == "mask":
        return MaskCost(
            c_new=float(block["c_new"]),
            c_node=float(block["c_node"]),
            prefix_len=int(block.get("prefix_len", DEFAULT_PREFIX_LEN)),
        )
    raise ValueError(f"unknown cost variant: {variant!r}")


def cost_model_to_config(model: CostModel) -> dict:
    if isinstance(model, ConstantCost):
        return {"variant": "constant", "c": model.c}
    return {
        "variant": "mask",
        "c_new": model.c_new,
        "c_node": model.c_node,
        "prefix_len": model.prefix_len,
    }
