"""Domain types, units, and configuration validation.

Internal units are strict SI: lengths in meters, times in seconds, diffusion
coefficients in m^2/s. The JSON config interface and the CLI accept lengths in
micrometers (the natural scale for receiver geometries) and convert here, at
the boundary, so no other module ever mixes unit systems.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, fields
from enum import Enum
from typing import Optional

import numpy as np

MICROMETERS_PER_METER = 1e6  # exactly representable, so um/1e6 is one rounding
DEFAULT_SEED = 42


class Algorithm(str, Enum):
    """Absorption-determination criterion applied each time step."""

    SMC = "smc"    # absorbed iff the sampled end-of-step position is inside
    SC = "sc"      # absorbed iff the start-to-end segment crosses the sphere
    RMC = "rmc"    # SMC plus a planar-boundary crossing probability for
                   # steps that start and end outside
    APMC = "apmc"  # absorption decided from the start-of-step distance,
                   # before any displacement; survivors never land inside


class MoleculeStatus(Enum):
    FREE = "free"
    ABSORBED = "absorbed"


class ConfigError(ValueError):
    """A simulation configuration violates one of its invariants."""


@dataclass(frozen=True)
class SimulationConfig:
    """All physical and numerical parameters of one experiment.

    Attributes:
        diffusion_coefficient: D in m^2/s.
        receiver_radius: sphere radius in m.
        tx_rx_distance: origin-to-receiver-center distance in m; the point
            transmitter sits at the origin, strictly outside the receiver.
        num_molecules: molecules released at t = 0.
        time_step: step length in s.
        num_steps: number of simulation steps.
        algorithm: absorption criterion, see :class:`Algorithm`.
        trials: independent repetitions of the whole run.
        seed: unsigned 64-bit reproducibility seed.
        max_resample_attempts: cap on the revert-and-redraw loop used by
            APMC; converts a pathological parameter/RNG combination into a
            diagnosable error instead of a hang.
    """

    diffusion_coefficient: float
    receiver_radius: float
    tx_rx_distance: float
    num_molecules: int
    time_step: float
    num_steps: int
    algorithm: Algorithm
    trials: int = 1
    seed: int = DEFAULT_SEED
    max_resample_attempts: int = 1000


def validate(config: SimulationConfig) -> SimulationConfig:
    """Check every config invariant; return the config unchanged if valid.

    Pure function: raises :class:`ConfigError` with a distinct message per
    violated invariant, never mutates.
    """
    def positive(value: float, what: str) -> None:
        if not (math.isfinite(value) and value > 0):
            raise ConfigError(f"non-positive {what}: {value!r}")

    positive(config.diffusion_coefficient, "diffusion coefficient")
    positive(config.receiver_radius, "receiver radius")
    positive(config.time_step, "time step")
    positive(config.tx_rx_distance, "tx-rx distance")
    if config.tx_rx_distance <= config.receiver_radius:
        raise ConfigError(
            "transmitter inside/on receiver: tx_rx_distance "
            f"({config.tx_rx_distance!r} m) must exceed receiver_radius "
            f"({config.receiver_radius!r} m)"
        )
    if config.num_molecules < 1:
        raise ConfigError(f"num_molecules must be >= 1, got {config.num_molecules}")
    if config.num_steps < 1:
        raise ConfigError(f"num_steps must be >= 1, got {config.num_steps}")
    if config.trials < 1:
        raise ConfigError(f"trials must be >= 1, got {config.trials}")
    if config.max_resample_attempts < 1:
        raise ConfigError(
            f"max_resample_attempts must be >= 1, got {config.max_resample_attempts}"
        )
    if not 0 <= config.seed < 2**64:
        raise ConfigError(f"seed must fit in an unsigned 64-bit integer, got {config.seed}")
    if not isinstance(config.algorithm, Algorithm):
        raise ConfigError(f"unknown algorithm: {config.algorithm!r}")
    return config


@dataclass(frozen=True)
class ReceiverGeometry:
    """The absorbing sphere: center (m) and radius (m)."""

    center: tuple[float, float, float]
    radius: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.radius) and self.radius > 0):
            raise ConfigError(f"non-positive receiver radius: {self.radius!r}")

    @classmethod
    def from_config(cls, config: SimulationConfig) -> "ReceiverGeometry":
        return cls(center=(config.tx_rx_distance, 0.0, 0.0), radius=config.receiver_radius)

    def center_array(self) -> np.ndarray:
        return np.array(self.center, dtype=np.float64)


@dataclass(eq=False)
class MoleculeState:
    """Position and absorption status of a single molecule.

    ``absorbed_at_step`` is set exactly once, when the molecule is absorbed,
    and never changes afterwards.
    """

    position: np.ndarray
    status: MoleculeStatus = MoleculeStatus.FREE
    absorbed_at_step: Optional[int] = None


@dataclass
class TimeSeriesResult:
    """Per-step absorbed counts for one trial (or averaged over trials).

    ``times[k-1] = k * dt``; counts are cumulative and non-decreasing.
    ``cumulative_absorbed`` is float so that trial averages keep their
    sub-count resolution; for a single trial it is integer-valued.
    """

    algorithm: Algorithm
    num_molecules: int
    times: np.ndarray
    cumulative_absorbed: np.ndarray
    fraction: np.ndarray
    analytic_fraction: np.ndarray


@dataclass
class DistributionResult:
    """Newly-absorbed counts per step across repeated trials.

    ``newly_absorbed[t, k-1]`` is the count trial ``t`` absorbed during step
    ``k`` (the interval ``((k-1)*dt, k*dt]``).
    """

    algorithm: Algorithm
    num_molecules: int
    times: np.ndarray
    newly_absorbed: np.ndarray
    analytic_increments: np.ndarray

    @property
    def trials(self) -> int:
        return self.newly_absorbed.shape[0]

    def step_means(self) -> np.ndarray:
        return self.newly_absorbed.mean(axis=0)

    def step_variances(self) -> np.ndarray:
        # population variance: stays defined (0) for a single trial
        return self.newly_absorbed.var(axis=0)

    def pmf(self, step: int) -> tuple[np.ndarray, np.ndarray]:
        """Empirical probability mass of the count observed at step ``step`` (1-based)."""
        if not 1 <= step <= self.times.size:
            raise IndexError(f"step {step} outside 1..{self.times.size}")
        counts = self.newly_absorbed[:, step - 1]
        values, occurrences = np.unique(counts, return_counts=True)
        return values, occurrences / counts.size


# --- JSON boundary -----------------------------------------------------------
#
# Flat object, keys identical to SimulationConfig field names; receiver_radius
# and tx_rx_distance are micrometers in the file, everything else SI.

_LENGTH_FIELDS = ("receiver_radius", "tx_rx_distance")
_REQUIRED_FIELDS = (
    "diffusion_coefficient",
    "receiver_radius",
    "tx_rx_distance",
    "num_molecules",
    "time_step",
    "num_steps",
    "algorithm",
)


def _micrometers_to_meters(um: float) -> float:
    return um / MICROMETERS_PER_METER


def _meters_to_micrometers(meters: float) -> float:
    """Micrometer value whose parse (um / 1e6) reproduces ``meters`` exactly.

    Plain ``meters * 1e6`` round-trips for most but not all doubles; nudging
    by a few ulps finds an exact preimage whenever one exists (it always does
    for values that entered through the micrometer interface).
    """
    um = meters * 1e6
    if _micrometers_to_meters(um) == meters:
        return um
    for direction in (math.inf, -math.inf):
        candidate = um
        for _ in range(4):
            candidate = math.nextafter(candidate, direction)
            if _micrometers_to_meters(candidate) == meters:
                return candidate
    return um


def config_to_dict(config: SimulationConfig) -> dict:
    out: dict = {}
    for f in fields(SimulationConfig):
        value = getattr(config, f.name)
        if f.name in _LENGTH_FIELDS:
            value = _meters_to_micrometers(value)
        elif f.name == "algorithm":
            value = value.value
        out[f.name] = value
    return out


def config_from_dict(data: dict) -> SimulationConfig:
    known = {f.name for f in fields(SimulationConfig)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    missing = [name for name in _REQUIRED_FIELDS if name not in data]
    if missing:
        raise ConfigError(f"missing config keys: {missing}")

    kwargs = dict(data)
    for name in _LENGTH_FIELDS:
        kwargs[name] = _micrometers_to_meters(float(kwargs[name]))
    try:
        kwargs["algorithm"] = Algorithm(str(kwargs["algorithm"]).lower())
    except ValueError:
        raise ConfigError(f"unknown algorithm: {data['algorithm']!r}") from None
    for name in ("num_molecules", "num_steps", "trials", "seed", "max_resample_attempts"):
        if name in kwargs:
            kwargs[name] = int(kwargs[name])
    for name in ("diffusion_coefficient", "time_step"):
        kwargs[name] = float(kwargs[name])
    return validate(SimulationConfig(**kwargs))


def save_config(config: SimulationConfig, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(config_to_dict(config), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_config(path) -> SimulationConfig:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a flat JSON object")
    return config_from_dict(data)
