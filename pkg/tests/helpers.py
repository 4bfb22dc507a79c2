"""Molecule-at-a-time reference simulator built from the scalar operations.

Consumes random draws in the documented per-step order, so a trial must match
the engine's vectorized path bit for bit. Only suitable for small N*M.
"""
import numpy as np

from absorbsim import (
    Algorithm,
    ReceiverGeometry,
    apmc_resample,
    brownian_step,
    decide_apmc_pre,
    decide_rmc,
    decide_sc,
    decide_smc,
    make_stream,
)


def reference_trial(config, trial_id=0):
    """Returns (absorbed_at_step, final_positions) for one trial."""
    geometry = ReceiverGeometry.from_config(config)
    d_coeff = config.diffusion_coefficient
    dt = config.time_step
    absorbed_at = np.full(config.num_molecules, -1, dtype=np.int64)
    positions = np.zeros((config.num_molecules, 3))

    for j in range(config.num_molecules):
        stream = make_stream(config.seed, trial_id, j)
        pos = np.zeros(3)
        for k in range(1, config.num_steps + 1):
            if config.algorithm is Algorithm.APMC:
                if decide_apmc_pre(pos, geometry, d_coeff, dt, stream):
                    absorbed_at[j] = k
                    break
                pos = apmc_resample(pos, geometry, d_coeff, dt, stream,
                                    config.max_resample_attempts)
            else:
                proposal = brownian_step(pos, d_coeff, dt, stream)
                if config.algorithm is Algorithm.SMC:
                    hit = decide_smc(pos, proposal, geometry)
                elif config.algorithm is Algorithm.SC:
                    hit = decide_sc(pos, proposal, geometry)
                else:
                    hit = decide_rmc(pos, proposal, geometry, d_coeff, dt, stream)
                pos = proposal
                if hit:
                    absorbed_at[j] = k
                    break
        positions[j] = pos
    return absorbed_at, positions


def newly_absorbed_counts(absorbed_at, num_steps):
    counts = np.zeros(num_steps, dtype=np.int64)
    for k in range(1, num_steps + 1):
        counts[k - 1] = int((absorbed_at == k).sum())
    return counts
