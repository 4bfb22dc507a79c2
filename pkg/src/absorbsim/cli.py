"""Command-line front end: named experiment presets, overrides, CSV output.

Every run writes one time-series CSV covering all requested algorithms plus,
per algorithm, a newly-absorbed distribution CSV and its summary. Output is a
pure function of (preset, overrides, seed): rerunning a command reproduces
the files byte for byte.
"""
from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, fields, replace
from pathlib import Path

from .core import (
    Algorithm,
    ConfigError,
    DistributionResult,
    SimulationConfig,
    TimeSeriesResult,
    load_config,
    validate,
)
from .engine import run_trials

SEED_ENV_VAR = "ABSORB_SIM_SEED"

_ALL_ALGORITHMS = (Algorithm.SMC, Algorithm.SC, Algorithm.RMC, Algorithm.APMC)


@dataclass(frozen=True)
class ExperimentPreset:
    """A named experiment: bound parameters plus the algorithms to compare."""

    name: str
    base: dict
    algorithms: tuple[Algorithm, ...]


def _preset(name, *, receiver_radius, time_step, num_steps, num_molecules,
            trials, algorithms) -> ExperimentPreset:
    return ExperimentPreset(
        name=name,
        base=dict(
            diffusion_coefficient=1e-9,
            receiver_radius=receiver_radius,
            tx_rx_distance=50e-6,
            num_molecules=num_molecules,
            time_step=time_step,
            num_steps=num_steps,
            trials=trials,
        ),
        algorithms=algorithms,
    )


PRESETS = {
    p.name: p
    for p in (
        _preset("fig3a", receiver_radius=20e-6, time_step=0.1, num_steps=100,
                num_molecules=10**6, trials=1, algorithms=_ALL_ALGORITHMS),
        _preset("fig3b", receiver_radius=0.5e-6, time_step=0.1, num_steps=100,
                num_molecules=10**6, trials=1, algorithms=_ALL_ALGORITHMS),
        _preset("fig4a", receiver_radius=10e-6, time_step=0.5, num_steps=100,
                num_molecules=10**6, trials=1, algorithms=_ALL_ALGORITHMS),
        _preset("fig4b", receiver_radius=10e-6, time_step=5.0, num_steps=100,
                num_molecules=10**6, trials=1, algorithms=_ALL_ALGORITHMS),
        _preset("fig5", receiver_radius=10e-6, time_step=0.5, num_steps=10,
                num_molecules=10**3, trials=10**3,
                algorithms=(Algorithm.RMC, Algorithm.APMC)),
    )
}


class UsageError(Exception):
    """Bad flag combination discovered after argparse."""


@dataclass(frozen=True)
class RunPlan:
    name: str
    base: SimulationConfig   # algorithm field holds the first requested one
    algorithms: tuple[Algorithm, ...]
    workers: int
    out_dir: Path


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="absorbsim",
        description="Brownian-motion Monte Carlo of molecules absorbed by a "
                    "spherical receiver, with four absorption criteria "
                    "(smc, sc, rmc, apmc) and a closed-form reference curve.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run an experiment and write CSV results")
    run.add_argument("--preset", choices=sorted(PRESETS),
                     help="named experiment; flags below override its fields")
    run.add_argument("--config", metavar="PATH",
                     help="JSON config file (lengths in micrometers)")
    run.add_argument("--algorithm", metavar="LIST",
                     help="comma list of smc|sc|rmc|apmc (default: preset's list)")
    run.add_argument("--diffusion", type=float, metavar="M2_PER_S",
                     help="diffusion coefficient in m^2/s (default 1e-9)")
    run.add_argument("--radius-um", type=float, help="receiver radius in micrometers")
    run.add_argument("--distance-um", type=float,
                     help="transmitter-to-receiver-center distance in micrometers (default 50)")
    run.add_argument("--dt", type=float, help="time step in seconds")
    run.add_argument("--steps", type=int, help="number of time steps")
    run.add_argument("--n", type=int, help="number of molecules released")
    run.add_argument("--scale-n", type=int,
                     help="override the molecule count (e.g. to shrink a preset)")
    run.add_argument("--trials", type=int, help="independent repetitions")
    run.add_argument("--seed", type=int,
                     help=f"u64 seed (default: ${SEED_ENV_VAR} or 42)")
    run.add_argument("--workers", type=int, default=1,
                     help="trial-level parallelism; output is identical for any value")
    run.add_argument("--out", default="results", metavar="DIR",
                     help="output directory (default: ./results)")
    return parser


def parse_algorithms(text: str) -> tuple[Algorithm, ...]:
    tokens = [tok.strip() for tok in text.split(",")]
    tokens = [tok for tok in tokens if tok]
    if not tokens:
        raise UsageError("empty algorithm list")
    out = []
    for tok in tokens:
        try:
            algo = Algorithm(tok.lower())
        except ValueError:
            choices = ", ".join(a.value for a in _ALL_ALGORITHMS)
            raise UsageError(f"unknown algorithm {tok!r} (choose from {choices})") from None
        if algo not in out:
            out.append(algo)
    return tuple(out)


def _default_seed() -> int:
    env = os.environ.get(SEED_ENV_VAR)
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"${SEED_ENV_VAR} must be an integer, got {env!r}") from None
    return 42


def resolve_run_plan(args: argparse.Namespace) -> RunPlan:
    """Merge defaults < preset < config file < flags into a run plan."""
    merged: dict = dict(diffusion_coefficient=1e-9, tx_rx_distance=50e-6,
                        trials=1, max_resample_attempts=1000)
    algorithms: tuple[Algorithm, ...] = _ALL_ALGORITHMS

    if args.preset:
        preset = PRESETS[args.preset]
        merged.update(preset.base)
        algorithms = preset.algorithms
    if args.config:
        file_config = load_config(args.config)
        merged.update({f.name: getattr(file_config, f.name)
                       for f in fields(SimulationConfig)})
        algorithms = (file_config.algorithm,)

    flag_map = {
        "diffusion_coefficient": args.diffusion,
        "receiver_radius": args.radius_um / 1e6 if args.radius_um is not None else None,
        "tx_rx_distance": args.distance_um / 1e6 if args.distance_um is not None else None,
        "time_step": args.dt,
        "num_steps": args.steps,
        "num_molecules": args.n,
        "trials": args.trials,
        "seed": args.seed,
    }
    for key, value in flag_map.items():
        if value is not None:
            merged[key] = value
    if args.scale_n is not None:
        merged["num_molecules"] = args.scale_n
    if args.algorithm:
        algorithms = parse_algorithms(args.algorithm)
    merged.setdefault("seed", _default_seed())

    required = ("receiver_radius", "time_step", "num_steps", "num_molecules")
    missing = [name for name in required if name not in merged]
    if missing:
        raise UsageError(
            "missing required parameters (use a preset, a config file, or flags): "
            + ", ".join(sorted(missing))
        )

    merged.pop("algorithm", None)
    base = validate(SimulationConfig(algorithm=algorithms[0], **merged))
    if args.workers < 1:
        raise UsageError(f"workers must be >= 1, got {args.workers}")
    return RunPlan(
        name=args.preset or "custom",
        base=base,
        algorithms=algorithms,
        workers=args.workers,
        out_dir=Path(args.out),
    )


# --- CSV output ----------------------------------------------------------------

def _fmt(value) -> str:
    return format(float(value), ".12g")


def write_timeseries_csv(results: list[tuple[Algorithm, TimeSeriesResult]], path) -> None:
    """One row per (step, algorithm), time major, 12 significant digits."""
    if not results:
        raise ValueError("no time series to write")
    steps = results[0][1].times.size
    if any(series.times.size != steps for _, series in results):
        raise ValueError("time series lengths differ between algorithms")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("time_s,algorithm,absorbed,fraction,analytic_fraction\n")
        for k in range(steps):
            for algo, series in results:
                fh.write(",".join((
                    _fmt(series.times[k]),
                    algo.value,
                    _fmt(series.cumulative_absorbed[k]),
                    _fmt(series.fraction[k]),
                    _fmt(series.analytic_fraction[k]),
                )) + "\n")


def write_distribution_csv(dist: DistributionResult, path) -> None:
    """Long-format empirical mass function of newly-absorbed counts per step."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("step,time_s,newly_absorbed,probability\n")
        for k in range(1, dist.times.size + 1):
            values, probs = dist.pmf(k)
            for value, prob in zip(values, probs):
                fh.write(f"{k},{_fmt(dist.times[k - 1])},{int(value)},{_fmt(prob)}\n")


def write_distribution_summary_csv(dist: DistributionResult, path) -> None:
    means = dist.step_means()
    variances = dist.step_variances()
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("step,time_s,mean,variance,analytic_increment\n")
        for k in range(dist.times.size):
            fh.write(",".join((
                str(k + 1),
                _fmt(dist.times[k]),
                _fmt(means[k]),
                _fmt(variances[k]),
                _fmt(dist.analytic_increments[k]),
            )) + "\n")


# --- execution -------------------------------------------------------------------

def execute_run_plan(plan: RunPlan) -> int:
    plan.out_dir.mkdir(parents=True, exist_ok=True)
    completed: list[tuple[Algorithm, TimeSeriesResult, DistributionResult]] = []
    failures: list[tuple[Algorithm, Exception]] = []
    for algo in plan.algorithms:
        config = replace(plan.base, algorithm=algo)
        try:
            series, distribution = run_trials(config, workers=plan.workers)
        except Exception as exc:  # report which algorithm failed, keep going
            failures.append((algo, exc))
            print(f"FAILED {plan.name}/{algo.value}: {exc}", file=sys.stderr)
            continue
        completed.append((algo, series, distribution))
        print(
            f"{plan.name}/{algo.value}: fraction {series.fraction[-1]:.6f} "
            f"vs analytic {series.analytic_fraction[-1]:.6f} "
            f"at t={series.times[-1]:g}s"
        )

    if completed:
        ts_path = plan.out_dir / f"{plan.name}_timeseries.csv"
        write_timeseries_csv([(algo, series) for algo, series, _ in completed], ts_path)
        print(f"wrote {ts_path}")
        for algo, _, distribution in completed:
            dist_path = plan.out_dir / f"{plan.name}_distribution_{algo.value}.csv"
            summary_path = plan.out_dir / f"{plan.name}_distribution_{algo.value}_summary.csv"
            write_distribution_csv(distribution, dist_path)
            write_distribution_summary_csv(distribution, summary_path)
            print(f"wrote {dist_path}")
            print(f"wrote {summary_path}")
    return 1 if failures else 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return execute_run_plan(resolve_run_plan(args))
        parser.error(f"unknown command {args.command!r}")
    except (UsageError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
