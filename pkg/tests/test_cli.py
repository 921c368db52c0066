import json

import pytest

from main import main

TWO_DEVICES = {
    "task": {"total_shards": 4},
    "devices": [
        {"id": 0, "name": "fast", "cost_model": {"kind": "linear", "a": 1.0}},
        {"id": 1, "name": "slow", "cost_model": {"kind": "linear", "a": 2.0}},
    ],
}


def write_json(path, data):
    path.write_text(json.dumps(data), encoding="utf-8")
    return path


def run(capsys, *argv):
    code = main([str(arg) for arg in argv])
    out = capsys.readouterr().out
    return code, out


def run_json(capsys, *argv):
    code, out = run(capsys, *argv)
    return code, json.loads(out)


def test_schedule_two_devices(tmp_path, capsys):
    scenario = write_json(tmp_path / "instance.json", TWO_DEVICES)
    code, report = run_json(capsys, "schedule", scenario)
    assert code == 0
    assert report["scheduler"] == "fed_lbap"
    assert report["schedule"]["assignment"] == [3, 1]
    assert report["schedule"]["makespan"] == 3.0


def test_schedule_verify_against_oracle(tmp_path, capsys):
    scenario = write_json(tmp_path / "instance.json", TWO_DEVICES)
    code, report = run_json(capsys, "schedule", scenario, "--verify")
    assert code == 0
    assert report["verify"]["matches"] is True
    assert report["verify"]["oracle_value"] == 3.0


def test_schedule_single_device(tmp_path, capsys):
    scenario = write_json(tmp_path / "single.json", {
        "task": {"total_shards": 5},
        "devices": [{"id": 0, "cost_model": {"kind": "linear", "a": 1.5, "b": 1.0}}],
    })
    for scheduler in ("fed_lbap", "analytical", "mincost"):
        code, report = run_json(capsys, "schedule", scenario, "--scheduler", scheduler)
        assert code == 0
        assert report["schedule"]["assignment"] == [5]


def test_schedule_alpha_grid(tmp_path, capsys):
    scenario = write_json(tmp_path / "instance.json", TWO_DEVICES)
    code, report = run_json(capsys, "schedule", scenario, "--mode", "noniid", "--alpha-grid", "1.0:2.0:0.5")
    assert code == 0
    assert [row["alpha"] for row in report["alpha_sweep"]] == [1.0, 1.5, 2.0]
    assert all(sum(row["assignment"]) == 4 for row in report["alpha_sweep"])

    code, report = run_json(capsys, "schedule", scenario, "--alpha-grid", "2.0:1.0")
    assert code == 2
    assert report["error"]["code"] == "invalid_run_config"


def test_schedule_csv_rows(tmp_path, capsys):
    scenario = write_json(tmp_path / "instance.json", TWO_DEVICES)
    code, out = run(capsys, "schedule", scenario, "--format", "csv")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "device,name,shards,cost"
    assert lines[1] == "0,fast,3,3.0"
    assert lines[2] == "1,slow,1,2.0"


def test_infeasible_exits_3(tmp_path, capsys):
    scenario = write_json(tmp_path / "short.json", {
        "task": {"total_shards": 4},
        "devices": [
            {"id": 0, "cost_model": {"kind": "table", "costs": [1.0]}},
            {"id": 1, "cost_model": {"kind": "table", "costs": [1.0, 2.0]}},
        ],
    })
    code, report = run_json(capsys, "schedule", scenario)
    assert code == 3
    assert report["error"]["code"] == "infeasible"


def test_malformed_json_points_at_line(tmp_path, capsys):
    scenario = tmp_path / "broken.json"
    scenario.write_text('{\n  "task": {"total_shards": 4},\n  "devices": [\n}\n', encoding="utf-8")
    code, report = run_json(capsys, "schedule", scenario)
    assert code == 2
    assert report["error"]["code"] == "invalid_run_config"
    assert report["error"]["details"]["line"] == 4
    assert "broken.json:4:" in report["error"]["message"]


def test_unknown_fields_rejected(tmp_path, capsys):
    extra = write_json(tmp_path / "extra.json", {**TWO_DEVICES, "rounds": 3})
    code, report = run_json(capsys, "schedule", extra)
    assert code == 2
    assert "rounds" in report["error"]["message"]

    bad_device = write_json(tmp_path / "device.json", {
        "task": {"total_shards": 4},
        "devices": [{"id": 0, "cost_model": {"kind": "linear", "a": 1.0}, "speed": 2}],
    })
    code, report = run_json(capsys, "schedule", bad_device)
    assert code == 2
    assert report["error"]["code"] == "invalid_run_config"


def test_invalid_profile_exits_2(tmp_path, capsys):
    scenario = write_json(tmp_path / "negative.json", {
        "task": {"total_shards": 4},
        "devices": [{"id": 0, "cost_model": {"kind": "linear", "a": -1.0}}],
    })
    code, report = run_json(capsys, "schedule", scenario)
    assert code == 2
    assert report["error"]["code"] == "non_positive_slope"


def test_profile_sample_preset(capsys):
    code, report = run_json(capsys, "profile", "--preset", "sample")
    assert code == 0
    nexus = next(device for device in report["devices"] if device["device"] == "Nexus6")
    reference = next(fit for fit in nexus["step_one"] if fit["data_batches"] == 10)
    assert reference["predicted_seconds"] == pytest.approx(2598.0, rel=1e-8)
    assert nexus["a"] == pytest.approx(259.8, rel=1e-8)
    assert len(report["devices"]) == 6


def test_profile_trace_file(tmp_path, capsys):
    points = [(1.0, 0.0), (0.0, 1.0), (1.0, 1.0), (2.0, 3.0)]
    runs = []
    for batches, scale in ((5, 1.0), (10, 2.0)):
        for conv, dense in points:
            runs.append({
                "device": "bench",
                "conv_params": conv,
                "dense_params": dense,
                "data_batches": batches,
                "seconds": scale * (10 + 2 * conv + 3 * dense),
            })
    trace = write_json(tmp_path / "trace.json", runs)

    code, report = run_json(capsys, "profile", trace, "--conv", "1", "--dense", "1")
    assert code == 0
    (device,) = report["devices"]
    assert device["a"] == pytest.approx(3.0, rel=1e-8)
    assert device["b"] == pytest.approx(0.0, abs=1e-6)


def test_profile_jsonl_error_cites_line(tmp_path, capsys):
    trace = tmp_path / "trace.jsonl"
    trace.write_text(
        '{"conv_params": 1, "dense_params": 2, "data_batches": 5, "seconds": 3}\n'
        '{"conv_params": 1, "dense_params": \n',
        encoding="utf-8",
    )
    code, report = run_json(capsys, "profile", trace)
    assert code == 2
    assert report["error"]["code"] == "parse_error"
    assert report["error"]["details"]["line"] == 2


def test_profile_needs_a_source(capsys):
    code, report = run_json(capsys, "profile")
    assert code == 2
    assert report["error"]["code"] == "invalid_run_config"


def test_simulate_preset_campaign(tmp_path, capsys):
    campaign = write_json(tmp_path / "campaign.json", {
        "preset": "T5",
        "dataset": "mnist",
        "schedulers": ["fed_lbap", "equal_split", "random"],
        "seed": 3,
    })
    code, first = run(capsys, "simulate", campaign)
    assert code == 0
    report = json.loads(first)
    speedups = {outcome["scheduler"]: outcome["speedup"] for outcome in report["outcomes"]}
    assert speedups["fed_lbap"] >= 2.0
    assert speedups["equal_split"] == 1.0

    code, second = run(capsys, "simulate", campaign)
    assert code == 0
    assert second == first


def test_simulate_seed_flag_overrides_file(tmp_path, capsys):
    campaign = write_json(tmp_path / "campaign.json", {"preset": "T2", "schedulers": ["random"], "seed": 3})
    code, report = run_json(capsys, "simulate", campaign, "--seed", "11")
    assert code == 0
    assert report["seed"] == 11


def test_diversity_rank(tmp_path, capsys):
    g = [[1.0, 0.0], [0.0]]
    q = [[0.0, 1.0], [0.0]]
    gradients = write_json(tmp_path / "gradients.json", {"users": [g, g, q]})
    code, report = run_json(capsys, "diversity", gradients)
    assert code == 0
    assert report["reference"] == "leave_one_out"
    assert report["users"][0]["user"] == 2
    assert report["users"][0]["diversity"] == pytest.approx(1.0)


def test_diversity_against_global(tmp_path, capsys):
    gradients = write_json(tmp_path / "gradients.json", {
        "users": [[[1.0, 0.0]], [[0.0, 3.0]]],
        "global": [[1.0, 0.0]],
    })
    code, report = run_json(capsys, "diversity", gradients)
    assert code == 0
    assert [entry["diversity"] for entry in report["users"]] == [0.5, 1.0]


def test_diversity_shape_mismatch(tmp_path, capsys):
    gradients = write_json(tmp_path / "gradients.json", {"users": [[[1.0, 0.0]], [[1.0], [0.0]]]})
    code, report = run_json(capsys, "diversity", gradients)
    assert code == 2
    assert report["error"]["code"] == "shape_mismatch"


def test_oracle_command(tmp_path, capsys):
    scenario = write_json(tmp_path / "instance.json", TWO_DEVICES)
    code, report = run_json(capsys, "oracle", scenario)
    assert code == 0
    assert report["objective"] == "makespan"
    assert report["assignment"] == [3, 1]

    code, report = run_json(capsys, "oracle", scenario, "--mode", "noniid", "--alpha", "2.0")
    assert code == 0
    assert report["assignment"] == [4, 0]


def test_oracle_rejects_large_instances(tmp_path, capsys):
    scenario = write_json(tmp_path / "large.json", {"preset": "T2"})
    code, report = run_json(capsys, "oracle", scenario)
    assert code == 2
    assert report["error"]["code"] == "too_large"


def test_out_writes_file(tmp_path, capsys):
    scenario = write_json(tmp_path / "instance.json", TWO_DEVICES)
    target = tmp_path / "report.json"
    code, out = run(capsys, "schedule", scenario, "--out", target)
    assert code == 0
    assert out == ""
    assert json.loads(target.read_text(encoding="utf-8"))["schedule"]["assignment"] == [3, 1]


@pytest.mark.parametrize("alpha", ["-2", "0"])
def test_schedule_rejects_non_positive_alpha(tmp_path, capsys, alpha):
    scenario = write_json(tmp_path / "instance.json", TWO_DEVICES)
    code, report = run_json(capsys, "schedule", scenario, "--mode", "noniid", "--alpha", alpha)
    assert code == 2
    assert report["error"]["code"] == "invalid_run_config"

    code, report = run_json(capsys, "oracle", scenario, "--mode", "noniid", "--alpha", alpha)
    assert code == 2


def test_alpha_grid_must_start_above_zero(tmp_path, capsys):
    scenario = write_json(tmp_path / "instance.json", TWO_DEVICES)
    code, report = run_json(capsys, "schedule", scenario, "--alpha-grid=0:1:0.5")
    assert code == 2
    assert report["error"]["code"] == "invalid_run_config"
    assert "LO > 0" in report["error"]["message"]


def test_negative_seed_rejected(tmp_path, capsys):
    scenario = write_json(tmp_path / "instance.json", TWO_DEVICES)
    code, report = run_json(capsys, "schedule", scenario, "--scheduler", "random", "--seed", "-1")
    assert code == 2
    assert report["error"]["code"] == "invalid_run_config"

    campaign = write_json(tmp_path / "campaign.json", {"preset": "T1", "schedulers": ["random"]})
    code, report = run_json(capsys, "simulate", campaign, "--seed", "-1")
    assert code == 2


def test_campaign_typos_in_nested_blocks_rejected(tmp_path, capsys):
    scenario_typo = write_json(tmp_path / "scenario.json", {
        "preset": "T1",
        "scenario": {"n_users": 3, "total_samples": 3000, "mode": {"kind": "iid", "imbalance": 0.9}},
    })
    code, report = run_json(capsys, "simulate", scenario_typo)
    assert code == 2
    assert report["error"]["code"] == "invalid_run_config"

    convergence_typo = write_json(tmp_path / "convergence.json", {
        "preset": "T1",
        "schedulers": ["fed_lbap"],
        "convergence": {"fed_lbap": {"A": 0.9, "beta": 0.3, "k": 2.0}},
    })
    code, report = run_json(capsys, "simulate", convergence_typo)
    assert code == 2
    assert report["error"]["code"] == "invalid_run_config"


def test_usage_errors_print_json_body(capsys):
    code, report = run_json(capsys, "schedule")
    assert code == 2
    assert report["error"]["code"] == "invalid_run_config"

    code, report = run_json(capsys, "rebalance")
    assert code == 2
    assert report["error"]["code"] == "invalid_run_config"


def test_reports_are_byte_identical_across_runs(tmp_path, capsys):
    scenario = write_json(tmp_path / "instance.json", {
        "task": {"total_shards": 9},
        "devices": [
            {"id": 0, "cost_model": {"kind": "linear", "a": 1.0}},
            {"id": 1, "cost_model": {"kind": "linear", "a": 2.0, "b": 0.5}},
            {"id": 2, "cost_model": {"kind": "table", "costs": [1.0, 3.0, 4.0, 8.0]}},
        ],
    })
    commands = [
        ("schedule", scenario, "--scheduler", "random", "--seed", "5"),
        ("schedule", scenario, "--mode", "noniid"),
        ("profile", "--preset", "sample"),
        ("oracle", scenario),
        ("oracle", scenario, "--mode", "noniid"),
    ]
    for argv in commands:
        code, first = run(capsys, *argv)
        assert code == 0
        code, second = run(capsys, *argv)
        assert code == 0
        assert second == first
