"""Command-line front end: census, solve, safety, simulate.

Every command writes its outputs plus a manifest.json echoing the
resolved configuration, so runs are replayable.  Exit codes: 0 success,
1 bad input, 2 infeasible request or size guard.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .addr import (
    SnapshotParseError,
    census,
    inverse_mass_product,
    load_snapshot,
    write_census_csv,
    write_mask_counts_csv,
)
from .buffer import BucketShortfallError
from .cost import InfeasibleAllocationError, MaskCost, cost_model_from_config
from .game import (
    SizeGuardError,
    check_cost_monotonicity,
    check_safety_level_persistence,
    check_support_dichotomy,
    equilibrium_to_json,
    game_spec_from_json,
    reduction_report,
    solve,
)
from .safety import RestrictedDefender, attacker_best_response, write_reports_csv
from .sim import compare_policies, job_from_json, write_curves_csv

_EXIT_OK = 0
_EXIT_INPUT = 1
_EXIT_INFEASIBLE = 2


class _InputError(Exception):
    pass


class _InfeasibleError(Exception):
    pass


def _load_json(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise _InputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise _InputError(f"{path}: invalid JSON: {exc}") from exc


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_manifest(out: Path, command: str, resolved: dict, outputs: list[str]) -> None:
    manifest = {
        "command": command,
        "version": __version__,
        "resolved": resolved,
        "outputs": sorted(outputs),
    }
    with open(out / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _cmd_census(args) -> int:
    out = _out_dir(args)
    try:
        addrs = load_snapshot(args.snapshot)
    except FileNotFoundError as exc:
        raise _InputError(str(exc)) from exc
    except SnapshotParseError as exc:
        raise _InputError(f"{args.snapshot}: {exc}") from exc
    cen = census(addrs, prefix_len=args.prefix_len)
    with open(out / "masks.csv", "w", encoding="utf-8") as fh:
        write_mask_counts_csv(cen, fh)
    with open(out / "size_histogram.csv", "w", encoding="utf-8") as fh:
        write_census_csv(cen, fh)
    resolved = {
        "snapshot": args.snapshot,
        "prefix_len": args.prefix_len,
        "addresses": len(addrs),
        "distinct_masks": len(cen),
        "total_nodes": cen.total_nodes,
    }
    outputs = ["masks.csv", "size_histogram.csv"]
    if len(cen) == 0:
        _write_manifest(out, "census", resolved, outputs)
        raise _InfeasibleError("empty census: inverse mask-mass product undefined")
    product = inverse_mass_product(cen)
    resolved["log10_inverse_mass_product"] = product
    with open(out / "stats.json", "w", encoding="utf-8") as fh:
        json.dump({"log10_inverse_mass_product": product}, fh, indent=2, sort_keys=True)
        fh.write("\n")
    outputs.append("stats.json")
    _write_manifest(out, "census", resolved, outputs)
    print(f"log10 inverse mask-mass product: {product!r}")
    return _EXIT_OK


def _cmd_solve(args) -> int:
    out = _out_dir(args)
    spec = game_spec_from_json(_load_json(args.game))
    eq = solve(spec, tol=args.tol)
    with open(out / "equilibrium.json", "w", encoding="utf-8") as fh:
        json.dump(equilibrium_to_json(eq), fh, indent=2, sort_keys=True)
        fh.write("\n")

    level = eq.value - eq.gap  # certified defender guarantee
    w2 = spec.w_att / 2.0
    persistence = check_safety_level_persistence(spec, spec.w_att, w2, eq.sigma1, level)
    dichotomy = check_support_dichotomy(eq)
    monotone = check_cost_monotonicity(eq)
    reduction = reduction_report(spec)
    lines = [
        f"game value: {eq.value!r} (certified gap {eq.gap:.3e})",
        f"safety level persists under halved prize: {'pass' if persistence else 'FAIL'}",
        f"attacker support dichotomy: {'pass' if dichotomy else 'FAIL'}",
        f"support cost/mass monotonicity: {'pass' if monotone else 'FAIL'}",
        f"reduced game value {reduction.value_reduced!r} vs full {reduction.value_full!r}: "
        f"{'pass' if reduction.passed else 'FAIL'}",
    ]
    with open(out / "checks.txt", "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    for line in lines:
        print(line)
    _write_manifest(
        out,
        "solve",
        {"game": args.game, "tol": args.tol, "value": eq.value, "gap": eq.gap},
        ["equilibrium.json", "checks.txt"],
    )
    return _EXIT_OK if all([persistence, dichotomy, monotone, reduction.passed]) else _EXIT_INFEASIBLE


def _cmd_safety(args) -> int:
    out = _out_dir(args)
    config = _load_json(args.config)
    try:
        block = config["safety"]
        model = cost_model_from_config(config["cost"])
        w_att = float(block["W_att"])
        h = int(block["H"])
        budgets = [float(b) for b in block["budgets"]]
    except KeyError as exc:
        raise _InputError(f"{args.config}: missing key {exc}") from exc
    if not isinstance(model, MaskCost):
        raise _InputError("safety analysis needs a mask cost model")
    try:
        addrs = load_snapshot(args.snapshot)
    except FileNotFoundError as exc:
        raise _InputError(str(exc)) from exc
    except SnapshotParseError as exc:
        raise _InputError(f"{args.snapshot}: {exc}") from exc
    cen = census(addrs, prefix_len=model.prefix_len)
    if len(cen) == 0:
        raise _InfeasibleError("empty census: no classes to defend")
    weights = block.get("weights")
    if weights is None:
        defender = RestrictedDefender.uniform_over_masks(cen, h)
    else:
        defender = RestrictedDefender({int(a): float(p) for a, p in weights.items()}, h)
    rows = []
    for budget in budgets:
        report = attacker_best_response(defender, cen, model, w_att, budget=budget)
        rows.append((budget, report))
    with open(out / "safety.csv", "w", encoding="utf-8") as fh:
        write_reports_csv(rows, fh)
    unbounded = attacker_best_response(defender, cen, model, w_att)
    resolved = {
        "snapshot": args.snapshot,
        "config": args.config,
        "H": h,
        "W_att": w_att,
        "budgets": budgets,
        "weights": {str(a): p for a, p in sorted(defender.p.items())},
        "safety_level": unbounded.expected_utility,
    }
    _write_manifest(out, "safety", resolved, ["safety.csv"])
    print(f"safety level (no budget cap): {unbounded.expected_utility!r}")
    return _EXIT_OK


def _cmd_simulate(args) -> int:
    out = _out_dir(args)
    obj = _load_json(args.scenario)
    if args.seed is not None:
        obj["seed"] = args.seed
    job = job_from_json(obj)
    comparison = compare_policies(job.scenario, job.policies)
    with open(out / "curves.csv", "w", encoding="utf-8") as fh:
        write_curves_csv(comparison.curves.values(), fh)
    lines = comparison.lines()
    with open(out / "summary.txt", "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    for line in lines:
        print(line)
    from .sim import job_to_json

    _write_manifest(
        out,
        "simulate",
        {"scenario": args.scenario, "resolved_job": job_to_json(job)},
        ["curves.csv", "summary.txt"],
    )
    return _EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="peerguard",
        description="Peer-selection defense analysis: census, game solving, "
        "safety levels, and attack simulation.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("census", help="mask census and product statistic from a snapshot")
    p.add_argument("snapshot", help="peer snapshot file, one IPv4 per line")
    p.add_argument("--prefix-len", type=int, default=16, dest="prefix_len")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_census)

    p = sub.add_parser("solve", help="solve a finite game instance and run checks")
    p.add_argument("game", help="game spec JSON (universe, H, W_att, cost)")
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("safety", help="restricted-defender safety report over budgets")
    p.add_argument("snapshot", help="peer snapshot file")
    p.add_argument("--config", required=True, help="JSON with cost and safety blocks")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_safety)

    p = sub.add_parser("simulate", help="attack-success curves for all policies")
    p.add_argument("scenario", help="scenario JSON")
    p.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_simulate)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (
        _InfeasibleError,
        SizeGuardError,
        InfeasibleAllocationError,
        BucketShortfallError,
    ) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return _EXIT_INFEASIBLE
    except _InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_INPUT
    except (ValueError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
