import json

import pytest

from peerguard.cli import main

SNAPSHOT = "\n".join(
    ["# test snapshot"]
    + [f"10.{i}.0.{j}" for i in range(1, 4) for j in range(1, 3)]
    + ["10.9.0.1"]
) + "\n"

GAME = {
    "universe": ["10.1.0.1", "10.1.0.9", "10.2.0.1"],
    "H": 1,
    "W_att": 5.0,
    "cost": {"variant": "mask", "c_new": 2.0, "c_node": 1.0, "prefix_len": 16},
}

SCENARIO = {
    "census": {"masks": [{"size": 4, "count": 10}], "prefix_len": 16},
    "cost": {"variant": "mask", "c_new": 10.0, "c_node": 1.0, "prefix_len": 16},
    "W_att": 1e9,
    "budgets": [0.0, 70.0, 140.0],
    "H": 4,
    "trials": 60,
    "seed": 5,
    "retransmission_factor": 2,
    "policies": {
        "naive": {"capacity": 64},
        "bucketed": {"bucket_size": 4, "bloom_bytes": 4096},
    },
}


@pytest.fixture
def snapshot_file(tmp_path):
    path = tmp_path / "peers.txt"
    path.write_text(SNAPSHOT)
    return str(path)


def read_manifest(out):
    return json.loads((out / "manifest.json").read_text())


def test_census_command(tmp_path, snapshot_file, capsys):
    out = tmp_path / "out"
    assert main(["census", snapshot_file, "--out", str(out)]) == 0
    stats = json.loads((out / "stats.json").read_text())
    # three masks of 2 (M_2 = 6) and one of 1 (M_1 = 1): product 6
    assert stats["log10_inverse_mass_product"] == pytest.approx(-0.7781512503836436)
    hist = (out / "size_histogram.csv").read_text()
    assert hist == "mask_size,num_masks,M_a\n1,1,1\n2,3,6\n"
    masks = (out / "masks.csv").read_text().splitlines()
    assert masks[0] == "mask,count"
    assert len(masks) == 5
    manifest = read_manifest(out)
    assert manifest["command"] == "census"
    assert manifest["resolved"]["total_nodes"] == 7
    assert "stats.json" in manifest["outputs"]
    assert "inverse mask-mass product" in capsys.readouterr().out


def test_census_prefix_len_flag(tmp_path, snapshot_file):
    out = tmp_path / "out"
    assert main(["census", snapshot_file, "--prefix-len", "8", "--out", str(out)]) == 0
    manifest = read_manifest(out)
    assert manifest["resolved"]["distinct_masks"] == 1  # everything is in 10/8
    assert manifest["resolved"]["prefix_len"] == 8


def test_census_bad_snapshot(tmp_path, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text("10.0.0.1\nnot-an-ip\n")
    assert main(["census", str(bad), "--out", str(tmp_path / "out")]) == 1
    assert "line 2" in capsys.readouterr().err


def test_census_missing_snapshot(tmp_path):
    assert main(["census", str(tmp_path / "nope.txt"), "--out", str(tmp_path / "o")]) == 1


def test_census_empty_snapshot_is_infeasible(tmp_path, capsys):
    empty = tmp_path / "empty.txt"
    empty.write_text("# nothing here\n")
    out = tmp_path / "out"
    assert main(["census", str(empty), "--out", str(out)]) == 2
    # the empty artifacts still land, with a manifest, for replayability
    assert (out / "masks.csv").exists()
    assert (out / "manifest.json").exists()
    assert "infeasible" in capsys.readouterr().err


def test_solve_command(tmp_path, capsys):
    game = tmp_path / "game.json"
    game.write_text(json.dumps(GAME))
    out = tmp_path / "out"
    assert main(["solve", str(game), "--out", str(out)]) == 0
    eq = json.loads((out / "equilibrium.json").read_text())
    assert set(eq) == {"value", "gap", "defender", "attacker"}
    assert eq["gap"] <= 1e-6
    checks = (out / "checks.txt").read_text().splitlines()
    assert len(checks) == 5
    assert all("FAIL" not in line for line in checks)
    assert "game value" in capsys.readouterr().out


def test_solve_bad_json(tmp_path):
    bad = tmp_path / "game.json"
    bad.write_text("{not json")
    assert main(["solve", str(bad), "--out", str(tmp_path / "out")]) == 1


def test_solve_missing_key(tmp_path):
    game = tmp_path / "game.json"
    game.write_text(json.dumps({"universe": ["10.0.0.1"]}))
    assert main(["solve", str(game), "--out", str(tmp_path / "out")]) == 1


def test_solve_oversized_universe_is_guarded(tmp_path, capsys):
    big = dict(GAME)
    big["universe"] = [f"10.{i}.{j}.1" for i in range(4) for j in range(4)]
    game = tmp_path / "game.json"
    game.write_text(json.dumps(big))
    assert main(["solve", str(game), "--out", str(tmp_path / "out")]) == 2
    assert "infeasible" in capsys.readouterr().err


def test_safety_command(tmp_path, snapshot_file, capsys):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({
        "cost": {"variant": "mask", "c_new": 10.0, "c_node": 1.0, "prefix_len": 16},
        "safety": {"W_att": 100.0, "H": 2, "budgets": [0.0, 20.0, 1000.0]},
    }))
    out = tmp_path / "out"
    assert main(["safety", snapshot_file, "--config", str(config), "--out", str(out)]) == 0
    rows = (out / "safety.csv").read_text().splitlines()
    assert rows[0] == "budget,investment,success_prob,expected_utility,bound"
    assert len(rows) == 4
    assert rows[1].startswith("0.0,0.0,0.0,")  # no budget, attacker abstains
    manifest = read_manifest(out)
    assert manifest["resolved"]["safety_level"] <= 0.0
    assert "safety level" in capsys.readouterr().out


def test_safety_rejects_constant_cost(tmp_path, snapshot_file):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({
        "cost": {"variant": "constant", "c": 1.0},
        "safety": {"W_att": 100.0, "H": 2, "budgets": [0.0]},
    }))
    assert main(["safety", snapshot_file, "--config", str(config),
                 "--out", str(tmp_path / "out")]) == 1


def test_safety_missing_block(tmp_path, snapshot_file):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"cost": {"variant": "mask", "c_new": 1, "c_node": 1}}))
    assert main(["safety", snapshot_file, "--config", str(config),
                 "--out", str(tmp_path / "out")]) == 1


def test_safety_empty_snapshot_is_infeasible(tmp_path):
    empty = tmp_path / "empty.txt"
    empty.write_text("\n")
    config = tmp_path / "config.json"
    config.write_text(json.dumps({
        "cost": {"variant": "mask", "c_new": 10.0, "c_node": 1.0},
        "safety": {"W_att": 100.0, "H": 2, "budgets": [0.0]},
    }))
    assert main(["safety", str(empty), "--config", str(config),
                 "--out", str(tmp_path / "out")]) == 2


def test_simulate_command(tmp_path, capsys):
    scenario = tmp_path / "scenario.json"
    scenario.write_text(json.dumps(SCENARIO))
    out = tmp_path / "out"
    assert main(["simulate", str(scenario), "--out", str(out)]) == 0
    curves = (out / "curves.csv").read_text().splitlines()
    assert curves[0] == "policy,budget,success,stderr"
    assert len(curves) == 1 + 2 * 3  # two policies, three budgets
    summary = (out / "summary.txt").read_text()
    assert "census buyout cost: 140" in summary
    manifest = read_manifest(out)
    assert manifest["resolved"]["resolved_job"]["seed"] == 5
    assert "budgets" in capsys.readouterr().out


def test_simulate_seed_override_and_rerun_identical(tmp_path):
    scenario = tmp_path / "scenario.json"
    scenario.write_text(json.dumps(SCENARIO))
    outs = [tmp_path / f"out{i}" for i in range(3)]
    for i, out in enumerate(outs):
        seed = "9" if i < 2 else "10"
        assert main(["simulate", str(scenario), "--seed", seed, "--out", str(out)]) == 0
    first, second, third = [(o / "curves.csv").read_bytes() for o in outs]
    assert first == second
    assert json.loads((outs[0] / "manifest.json").read_text())["resolved"][
        "resolved_job"]["seed"] == 9
    assert json.loads((outs[2] / "manifest.json").read_text())["resolved"][
        "resolved_job"]["seed"] == 10


def test_simulate_bad_scenario(tmp_path):
    scenario = tmp_path / "scenario.json"
    scenario.write_text(json.dumps({"census": {"masks": []}}))
    assert main(["simulate", str(scenario), "--out", str(tmp_path / "out")]) == 1


def test_no_command_exits_with_usage():
    with pytest.raises(SystemExit):
        main([])
