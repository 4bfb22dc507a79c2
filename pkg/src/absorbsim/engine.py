"""Simulation loop with pluggable per-step absorption criteria.

One step of the common loop: scan the not-yet-absorbed molecules, propagate
each by a Gaussian displacement with per-axis standard deviation
sqrt(2*D*dt), decide absorption by the configured criterion, record counts.
APMC inverts the order: it decides absorption from the start-of-step distance
first, then propagates the survivors, redrawing any proposal that lands
inside the sphere from the original position until it falls strictly outside.

Per-molecule random-draw order is fixed: SMC/SC consume 3 normals per step,
RMC 3 normals then at most one uniform, APMC one uniform then 3 normals per
propagation attempt. Absorbed molecules consume nothing further. Because each
molecule draws from its own counter-based stream, the vectorized step below
produces bit-identical results to a molecule-at-a-time loop over the scalar
operations, and trials can run on any number of workers without changing
output.

Boundary ties (distance exactly equal to the radius) count as inside for
SMC/SC/RMC and as probability 1 for APMC.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import (
    Algorithm,
    DistributionResult,
    MoleculeState,
    MoleculeStatus,
    ReceiverGeometry,
    SimulationConfig,
    TimeSeriesResult,
    validate,
)
from .kernels import (
    absorbed_fraction,
    planar_crossing_prob,
    segment_intersects_sphere,
    step_absorption_prob,
)
from .streams import RandomStream, StreamBundle


class ResampleExhaustedError(RuntimeError):
    """APMC revert loop hit its attempt cap for one molecule."""

    def __init__(self, molecule_id: int, step: int, attempts: int):
        super().__init__(
            f"molecule {molecule_id} still inside the receiver after "
            f"{attempts} propagation attempts at step {step}; raise "
            "max_resample_attempts or check the parameters"
        )
        self.molecule_id = molecule_id
        self.step = step
        self.attempts = attempts


def _dist_sq(points: np.ndarray, center: np.ndarray) -> np.ndarray:
    diff = points - center
    return (diff * diff).sum(axis=-1)


def _step_scale(config: SimulationConfig) -> float:
    return float(np.sqrt(2.0 * config.diffusion_coefficient * config.time_step))


# --- per-molecule operations -------------------------------------------------

def brownian_step(position, diffusion_coefficient, time_step, stream: RandomStream):
    """One Brownian displacement: adds an independent N(0, 2*D*dt) draw per axis.

    Consumes exactly 3 normal draws, in x, y, z order.
    """
    scale = float(np.sqrt(2.0 * diffusion_coefficient * time_step))
    draws = np.array(
        [stream.next_normal(), stream.next_normal(), stream.next_normal()]
    )
    return np.asarray(position, dtype=np.float64) + scale * draws


def decide_smc(p0, p1, geometry: ReceiverGeometry) -> bool:
    """Absorbed iff the end-of-step position is inside the sphere. No draws."""
    return bool(_dist_sq(np.asarray(p1, dtype=np.float64), geometry.center_array())
                <= geometry.radius**2)


def decide_sc(p0, p1, geometry: ReceiverGeometry) -> bool:
    """Absorbed iff the step segment touches the sphere. No draws."""
    return bool(segment_intersects_sphere(p0, p1, geometry.center, geometry.radius))


def decide_rmc(p0, p1, geometry, diffusion_coefficient, time_step,
               stream: RandomStream) -> bool:
    """SMC plus the planar-boundary crossing probability.

    An end position inside the sphere absorbs deterministically (no draw);
    otherwise one uniform decides against exp(-l_i*l_f/(D*dt)) where l_i and
    l_f are the start/end distances above the boundary.
    """
    center = geometry.center_array()
    end_sq = _dist_sq(np.asarray(p1, dtype=np.float64), center)
    if end_sq <= geometry.radius**2:
        return True
    start_gap = np.sqrt(_dist_sq(np.asarray(p0, dtype=np.float64), center)) - geometry.radius
    end_gap = np.sqrt(end_sq) - geometry.radius
    crossing = planar_crossing_prob(start_gap, end_gap, diffusion_coefficient, time_step)
    return stream.next_uniform() <= crossing


def decide_apmc_pre(p0, geometry, diffusion_coefficient, time_step,
                    stream: RandomStream) -> bool:
    """Absorption decided before any displacement, from the current distance.

    Consumes exactly one uniform; raises ValueError if the molecule is
    already inside the sphere (an engine invariant violation upstream).
    """
    distance = np.sqrt(_dist_sq(np.asarray(p0, dtype=np.float64), geometry.center_array()))
    prob = step_absorption_prob(distance, geometry.radius,
                                diffusion_coefficient, time_step)
    return stream.next_uniform() <= prob


def apmc_resample(p0, geometry, diffusion_coefficient, time_step,
                  stream: RandomStream, max_attempts: int) -> np.ndarray:
    """Propose Brownian steps from ``p0`` until one lands strictly outside.

    Every attempt restarts from the original position and consumes 3 normal
    draws; after ``max_attempts`` consecutive inside landings a
    :class:`ResampleExhaustedError` is raised.
    """
    center = geometry.center_array()
    r_sq = geometry.radius**2
    for attempt in range(1, max_attempts + 1):
        proposal = brownian_step(p0, diffusion_coefficient, time_step, stream)
        if _dist_sq(proposal, center) > r_sq:
            return proposal
    raise ResampleExhaustedError(-1, -1, max_attempts)


# --- trial execution ---------------------------------------------------------

@dataclass
class TrialState:
    """Mutable state of one trial: owned by exactly one worker."""

    step: int
    positions: np.ndarray          # (N, 3) m
    absorbed_at_step: np.ndarray   # (N,) int64, -1 while free
    streams: StreamBundle
    cumulative_absorbed: int = 0
    newly_absorbed: int = 0

    @property
    def num_molecules(self) -> int:
        return self.positions.shape[0]

    def free_indices(self) -> np.ndarray:
        return np.flatnonzero(self.absorbed_at_step < 0)

    def molecule_states(self) -> list[MoleculeState]:
        out = []
        for i in range(self.num_molecules):
            at = int(self.absorbed_at_step[i])
            out.append(MoleculeState(
                position=self.positions[i].copy(),
                status=MoleculeStatus.FREE if at < 0 else MoleculeStatus.ABSORBED,
                absorbed_at_step=None if at < 0 else at,
            ))
        return out


def new_trial_state(config: SimulationConfig, trial_id: int = 0) -> TrialState:
    """All molecules released at the origin, none absorbed, step counter 0."""
    n = config.num_molecules
    return TrialState(
        step=0,
        positions=np.zeros((n, 3)),
        absorbed_at_step=np.full(n, -1, dtype=np.int64),
        streams=StreamBundle(config.seed, trial_id, n),
    )


def run_step(state: TrialState, config: SimulationConfig,
             geometry: ReceiverGeometry) -> TrialState:
    """Advance one time step in place; see the module docstring for the order
    of operations and draw consumption per criterion."""
    k = state.step + 1
    center = geometry.center_array()
    r = geometry.radius
    r_sq = r * r
    scale = _step_scale(config)
    free = state.free_indices()
    if free.size == 0:
        state.step = k
        state.newly_absorbed = 0
        return state

    if config.algorithm is Algorithm.APMC:
        start = state.positions[free]
        distance = np.sqrt(_dist_sq(start, center))
        prob = step_absorption_prob(distance, r, config.diffusion_coefficient,
                                    config.time_step)
        hit = state.streams.uniforms(free) <= prob
        hit_idx = free[hit]
        survivors = free[~hit]
        if survivors.size:
            origin = state.positions[survivors]
            proposal = origin + scale * state.streams.normals(survivors)
            inside = _dist_sq(proposal, center) <= r_sq
            attempts = 1
            while inside.any():
                if attempts >= config.max_resample_attempts:
                    stuck = int(survivors[np.flatnonzero(inside)[0]])
                    raise ResampleExhaustedError(stuck, k, attempts)
                rows = np.flatnonzero(inside)
                proposal[rows] = origin[rows] + scale * state.streams.normals(survivors[rows])
                inside = np.zeros_like(inside)
                inside[rows] = _dist_sq(proposal[rows], center) <= r_sq
                attempts += 1
            state.positions[survivors] = proposal
    else:
        start = state.positions[free]
        proposal = start + scale * state.streams.normals(free)
        if config.algorithm is Algorithm.SMC:
            hit = _dist_sq(proposal, center) <= r_sq
        elif config.algorithm is Algorithm.SC:
            hit = segment_intersects_sphere(start, proposal, center, r)
        else:  # RMC
            end_sq = _dist_sq(proposal, center)
            hit = end_sq <= r_sq
            outside = ~hit
            if outside.any():
                start_gap = np.sqrt(_dist_sq(start[outside], center)) - r
                end_gap = np.sqrt(end_sq[outside]) - r
                crossing = planar_crossing_prob(
                    start_gap, end_gap,
                    config.diffusion_coefficient, config.time_step,
                )
                hit[outside] = state.streams.uniforms(free[outside]) <= crossing
        state.positions[free] = proposal
        hit_idx = free[hit]

    state.absorbed_at_step[hit_idx] = k
    state.newly_absorbed = int(hit_idx.size)
    state.cumulative_absorbed += state.newly_absorbed
    state.step = k
    return state


def _trial_counts(config: SimulationConfig, trial_id: int) -> np.ndarray:
    """Newly-absorbed count per step for one trial, shape (num_steps,)."""
    geometry = ReceiverGeometry.from_config(config)
    state = new_trial_state(config, trial_id)
    newly = np.zeros(config.num_steps, dtype=np.int64)
    for k in range(config.num_steps):
        run_step(state, config, geometry)
        newly[k] = state.newly_absorbed
    return newly


def _analytic_curve(config: SimulationConfig, times: np.ndarray) -> np.ndarray:
    return absorbed_fraction(times, config.receiver_radius,
                             config.tx_rx_distance, config.diffusion_coefficient)


def _times(config: SimulationConfig) -> np.ndarray:
    return np.arange(1, config.num_steps + 1) * config.time_step


def run_trial(config: SimulationConfig, trial_id: int = 0) -> TimeSeriesResult:
    """Run one trial; molecules released at the origin at t = 0, counts
    recorded at every k*dt alongside the closed-form curve."""
    validate(config)
    newly = _trial_counts(config, trial_id)
    cumulative = np.cumsum(newly)
    times = _times(config)
    return TimeSeriesResult(
        algorithm=config.algorithm,
        num_molecules=config.num_molecules,
        times=times,
        cumulative_absorbed=cumulative.astype(np.float64),
        fraction=cumulative / config.num_molecules,
        analytic_fraction=_analytic_curve(config, times),
    )


def run_trials(config: SimulationConfig,
               workers: int = 1) -> tuple[TimeSeriesResult, DistributionResult]:
    """Run ``config.trials`` independent trials.

    Randomness is keyed to (seed, trial, molecule), so any worker count
    yields bit-identical aggregates. Returns the trial-averaged time series
    and the per-trial newly-absorbed distribution.
    """
    validate(config)
    trial_ids = range(config.trials)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda t: _trial_counts(config, t), trial_ids))
    else:
        rows = [_trial_counts(config, t) for t in trial_ids]

    newly = np.vstack(rows)
    cumulative = np.cumsum(newly, axis=1)
    times = _times(config)
    analytic = _analytic_curve(config, times)
    mean_cumulative = cumulative.mean(axis=0)
    series = TimeSeriesResult(
        algorithm=config.algorithm,
        num_molecules=config.num_molecules,
        times=times,
        cumulative_absorbed=mean_cumulative,
        fraction=mean_cumulative / config.num_molecules,
        analytic_fraction=analytic,
    )
    distribution = DistributionResult(
        algorithm=config.algorithm,
        num_molecules=config.num_molecules,
        times=times,
        newly_absorbed=newly,
        analytic_increments=config.num_molecules * np.diff(analytic, prepend=0.0),
    )
    return series, distribution
