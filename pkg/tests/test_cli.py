import io
import json
from contextlib import redirect_stdout

import numpy as np
import pytest

from absorbsim import Algorithm, SimulationConfig, save_config
from absorbsim.cli import (
    PRESETS,
    UsageError,
    build_parser,
    main,
    parse_algorithms,
    resolve_run_plan,
    write_timeseries_csv,
)


def plan_for(argv):
    return resolve_run_plan(build_parser().parse_args(argv))


def test_preset_with_overrides_from_flags():
    plan = plan_for(["run", "--preset", "fig3b", "--algorithm", "apmc",
                     "--scale-n", "100000", "--seed", "7"])
    assert plan.name == "fig3b"
    assert plan.base.num_molecules == 100_000
    assert plan.base.seed == 7
    assert plan.base.receiver_radius == 0.5e-6
    assert plan.base.time_step == 0.1
    assert plan.base.num_steps == 100
    assert plan.algorithms == (Algorithm.APMC,)


def test_preset_table_matches_experiment_definitions():
    expect = {
        "fig3a": (20e-6, 0.1, 100, 10**6, 1),
        "fig3b": (0.5e-6, 0.1, 100, 10**6, 1),
        "fig4a": (10e-6, 0.5, 100, 10**6, 1),
        "fig4b": (10e-6, 5.0, 100, 10**6, 1),
        "fig5": (10e-6, 0.5, 10, 10**3, 10**3),
    }
    for name, (radius, dt, steps, n, trials) in expect.items():
        base = PRESETS[name].base
        assert base["receiver_radius"] == radius
        assert base["time_step"] == dt
        assert base["num_steps"] == steps
        assert base["num_molecules"] == n
        assert base["trials"] == trials
        assert base["diffusion_coefficient"] == 1e-9
        assert base["tx_rx_distance"] == 50e-6
    assert PRESETS["fig5"].algorithms == (Algorithm.RMC, Algorithm.APMC)
    assert len(PRESETS["fig3a"].algorithms) == 4


def test_unknown_preset_is_a_usage_error():
    with pytest.raises(SystemExit) as err:
        build_parser().parse_args(["run", "--preset", "nope"])
    assert err.value.code == 2


def test_unknown_flag_is_a_usage_error():
    with pytest.raises(SystemExit) as err:
        build_parser().parse_args(["run", "--preset", "fig5", "--frobnicate"])
    assert err.value.code == 2


def test_custom_run_equivalent_to_fig4b():
    plan = plan_for(["run", "--radius-um", "10", "--dt", "5", "--steps", "100",
                     "--distance-um", "50", "--n", "1000000",
                     "--algorithm", "rmc,apmc"])
    assert plan.name == "custom"
    preset = PRESETS["fig4b"].base
    assert plan.base.receiver_radius == preset["receiver_radius"]
    assert plan.base.time_step == preset["time_step"]
    assert plan.base.num_steps == preset["num_steps"]
    assert plan.base.num_molecules == preset["num_molecules"]
    assert plan.algorithms == (Algorithm.RMC, Algorithm.APMC)


def test_missing_required_parameters_reported():
    with pytest.raises(UsageError, match="missing required parameters"):
        plan_for(["run", "--dt", "1"])


def test_algorithm_list_parsing():
    assert parse_algorithms("smc,sc,rmc,apmc") == tuple(Algorithm)
    assert parse_algorithms("APMC") == (Algorithm.APMC,)
    with pytest.raises(UsageError, match="empty algorithm list"):
        parse_algorithms(" , ")
    with pytest.raises(UsageError, match="unknown algorithm"):
        parse_algorithms("smc,exact")


def test_empty_algorithm_list_fails_before_simulating(tmp_path):
    rc = main(["run", "--preset", "fig5", "--algorithm", ",",
               "--out", str(tmp_path)])
    assert rc == 2
    assert list(tmp_path.iterdir()) == []


def test_env_var_is_default_seed_and_flag_wins(monkeypatch):
    monkeypatch.setenv("ABSORB_SIM_SEED", "123")
    assert plan_for(["run", "--preset", "fig5"]).base.seed == 123
    assert plan_for(["run", "--preset", "fig5", "--seed", "9"]).base.seed == 9
    monkeypatch.setenv("ABSORB_SIM_SEED", "not-a-number")
    with pytest.raises(UsageError, match="ABSORB_SIM_SEED"):
        plan_for(["run", "--preset", "fig5"])


def test_config_file_binds_parameters(tmp_path):
    config = SimulationConfig(
        diffusion_coefficient=2e-9, receiver_radius=5e-6, tx_rx_distance=40e-6,
        num_molecules=1234, time_step=0.25, num_steps=8,
        algorithm=Algorithm.SC, trials=3, seed=77)
    path = tmp_path / "run.json"
    save_config(config, path)
    plan = plan_for(["run", "--config", str(path)])
    assert plan.base == config
    assert plan.algorithms == (Algorithm.SC,)
    # flags still override file values
    plan = plan_for(["run", "--config", str(path), "--n", "99"])
    assert plan.base.num_molecules == 99


def run_fig5_small(out_dir, extra=()):
    argv = ["run", "--preset", "fig5", "--scale-n", "200", "--trials", "40",
            "--seed", "9", "--out", str(out_dir), *extra]
    buffer = io.StringIO()
    with redirect_stdout(buffer):
        rc = main(argv)
    assert rc == 0
    return buffer.getvalue()


def test_run_writes_expected_files_and_is_byte_reproducible(tmp_path):
    first, second = tmp_path / "a", tmp_path / "b"
    run_fig5_small(first)
    run_fig5_small(second)
    names = sorted(p.name for p in first.iterdir())
    assert names == [
        "fig5_distribution_apmc.csv",
        "fig5_distribution_apmc_summary.csv",
        "fig5_distribution_rmc.csv",
        "fig5_distribution_rmc_summary.csv",
        "fig5_timeseries.csv",
    ]
    for name in names:
        assert (first / name).read_bytes() == (second / name).read_bytes()


def test_timeseries_csv_schema_and_order(tmp_path):
    run_fig5_small(tmp_path)
    lines = (tmp_path / "fig5_timeseries.csv").read_text().splitlines()
    assert lines[0] == "time_s,algorithm,absorbed,fraction,analytic_fraction"
    rows = [line.split(",") for line in lines[1:]]
    assert len(rows) == 10 * 2  # 10 steps x (rmc, apmc)
    # time major, algorithm minor, preset order
    assert [r[1] for r in rows[:4]] == ["rmc", "apmc", "rmc", "apmc"]
    times = np.array([float(r[0]) for r in rows])
    assert (np.diff(times) >= 0).all()
    # 12 significant digits
    fraction = float(rows[0][3])
    assert rows[0][3] == format(fraction, ".12g")


def test_distribution_csv_probabilities_sum_to_one(tmp_path):
    run_fig5_small(tmp_path)
    lines = (tmp_path / "fig5_distribution_rmc.csv").read_text().splitlines()
    assert lines[0] == "step,time_s,newly_absorbed,probability"
    totals = {}
    for line in lines[1:]:
        step, _, _, probability = line.split(",")
        totals[step] = totals.get(step, 0.0) + float(probability)
    assert set(totals) == {str(k) for k in range(1, 11)}
    for value in totals.values():
        assert abs(value - 1.0) <= 1e-9


def test_distribution_summary_matches_distribution(tmp_path):
    run_fig5_small(tmp_path)
    lines = (tmp_path / "fig5_distribution_apmc_summary.csv").read_text().splitlines()
    assert lines[0] == "step,time_s,mean,variance,analytic_increment"
    assert len(lines) == 11
    first = lines[1].split(",")
    assert first[0] == "1"
    # the analytic column lets consumers compute deviations directly
    assert float(first[4]) == pytest.approx(200 * 0.0411806421, rel=1e-6)


def test_single_trial_distribution_is_point_mass(tmp_path):
    argv = ["run", "--preset", "fig5", "--scale-n", "100", "--trials", "1",
            "--seed", "4", "--out", str(tmp_path)]
    with redirect_stdout(io.StringIO()):
        assert main(argv) == 0
    lines = (tmp_path / "fig5_distribution_rmc.csv").read_text().splitlines()
    steps = [line.split(",")[0] for line in lines[1:]]
    assert steps == [str(k) for k in range(1, 11)]  # one mass point per step
    for line in lines[1:]:
        assert line.split(",")[3] == "1"


def test_write_timeseries_csv_rejects_empty_results(tmp_path):
    with pytest.raises(ValueError, match="no time series"):
        write_timeseries_csv([], tmp_path / "x.csv")


def test_partial_failure_exit_code_and_report(tmp_path, monkeypatch, capsys):
    import absorbsim.cli as cli

    real = cli.run_trials

    def flaky(config, workers=1):
        if config.algorithm is Algorithm.RMC:
            raise RuntimeError("boom")
        return real(config, workers=workers)

    monkeypatch.setattr(cli, "run_trials", flaky)
    rc = main(["run", "--preset", "fig5", "--scale-n", "50", "--trials", "2",
               "--out", str(tmp_path)])
    captured = capsys.readouterr()
    assert rc == 1
    assert "FAILED fig5/rmc: boom" in captured.err
    assert (tmp_path / "fig5_timeseries.csv").exists()  # apmc still written
    assert not (tmp_path / "fig5_distribution_rmc.csv").exists()
