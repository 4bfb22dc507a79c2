import json
import math

import pytest
from hypothesis import given, strategies as st

from absorbsim import (
    Algorithm,
    ConfigError,
    SimulationConfig,
    config_from_dict,
    config_to_dict,
    load_config,
    save_config,
    validate,
)

FIG3A = SimulationConfig(
    diffusion_coefficient=1e-9,
    receiver_radius=20e-6,
    tx_rx_distance=50e-6,
    num_molecules=10**6,
    time_step=0.1,
    num_steps=100,
    algorithm=Algorithm.APMC,
)


def test_paper_scale_config_is_valid():
    assert validate(FIG3A) is FIG3A


def test_validate_is_pure():
    assert validate(FIG3A) is validate(FIG3A)


@pytest.mark.parametrize(
    "overrides, message",
    [
        (dict(tx_rx_distance=20e-6), "transmitter inside/on receiver"),
        (dict(tx_rx_distance=10e-6), "transmitter inside/on receiver"),
        (dict(time_step=0.0), "non-positive time step"),
        (dict(time_step=-1.0), "non-positive time step"),
        (dict(time_step=math.nan), "non-positive time step"),
        (dict(diffusion_coefficient=0.0), "non-positive diffusion coefficient"),
        (dict(receiver_radius=0.0), "non-positive receiver radius"),
        (dict(tx_rx_distance=0.0), "non-positive tx-rx distance"),
        (dict(num_molecules=0), "num_molecules"),
        (dict(num_steps=0), "num_steps"),
        (dict(trials=0), "trials"),
        (dict(max_resample_attempts=0), "max_resample_attempts"),
        (dict(seed=-1), "seed"),
        (dict(seed=2**64), "seed"),
    ],
)
def test_validate_rejects_each_invariant_distinctly(overrides, message):
    from dataclasses import replace

    bad = replace(FIG3A, **overrides)
    with pytest.raises(ConfigError, match=message):
        validate(bad)


def test_json_round_trip_identity():
    again = config_from_dict(config_to_dict(FIG3A))
    assert again == FIG3A


def test_json_file_round_trip(tmp_path):
    path = tmp_path / "config.json"
    save_config(FIG3A, path)
    data = json.loads(path.read_text())
    # lengths are micrometers in the file
    assert data["receiver_radius"] == pytest.approx(20.0)
    assert data["tx_rx_distance"] == pytest.approx(50.0)
    assert data["algorithm"] == "apmc"
    assert load_config(path) == FIG3A


def test_config_from_dict_rejects_unknown_and_missing_keys():
    good = config_to_dict(FIG3A)
    with pytest.raises(ConfigError, match="unknown config keys"):
        config_from_dict({**good, "wibble": 1})
    missing = dict(good)
    del missing["time_step"]
    with pytest.raises(ConfigError, match="missing config keys"):
        config_from_dict(missing)
    with pytest.raises(ConfigError, match="unknown algorithm"):
        config_from_dict({**good, "algorithm": "exact"})


@given(
    radius_um=st.floats(1e-3, 1e3),
    extra_um=st.floats(1e-3, 1e3),
    diffusion=st.floats(1e-12, 1e-6),
    dt=st.floats(1e-4, 100.0),
    n=st.integers(1, 10**7),
    steps=st.integers(1, 10**4),
    trials=st.integers(1, 10**4),
    seed=st.integers(0, 2**64 - 1),
    algorithm=st.sampled_from(list(Algorithm)),
)
def test_round_trip_for_any_micrometer_sourced_config(
    radius_um, extra_um, diffusion, dt, n, steps, trials, seed, algorithm
):
    # configs enter through the micrometer interface, as the CLI and JSON do
    config = config_from_dict(
        dict(
            diffusion_coefficient=diffusion,
            receiver_radius=radius_um,
            tx_rx_distance=radius_um + extra_um,
            num_molecules=n,
            time_step=dt,
            num_steps=steps,
            algorithm=algorithm.value,
            trials=trials,
            seed=seed,
        )
    )
    assert config_from_dict(config_to_dict(config)) == config
