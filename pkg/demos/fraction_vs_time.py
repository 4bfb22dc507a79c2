"""Compare the four absorption criteria against the closed-form curve.

Desk-scale version of the r=20um experiment: 20k molecules, dt=0.1s, 100
steps. At this radius the step spread sqrt(D*dt) is half the radius, the
regime where the planar-boundary correction (rmc) tracks the analytic curve
while the endpoint test (smc) undercounts and the a-priori test (apmc)
overcounts.
"""
import numpy as np

from absorbsim import Algorithm, SimulationConfig, run_trial

config = SimulationConfig(
    diffusion_coefficient=1e-9,   # m^2/s
    receiver_radius=20e-6,        # m
    tx_rx_distance=50e-6,         # m
    num_molecules=20_000,
    time_step=0.1,                # s
    num_steps=100,
    algorithm=Algorithm.SMC,      # replaced per run below
    seed=42,
)

curves = {}
for algorithm in Algorithm:
    from dataclasses import replace

    series = run_trial(replace(config, algorithm=algorithm))
    curves[algorithm.value] = series.fraction

times = series.times
analytic = series.analytic_fraction

print(f"N={config.num_molecules}, r=20um, d=50um, dt=0.1s "
      f"(sqrt(D*dt)/r = {np.sqrt(1e-9 * 0.1) / 20e-6:.2f})\n")
print("  t(s)   analytic     smc      sc       rmc      apmc")
for k in range(9, 100, 10):
    row = "  ".join(f"{curves[name][k]:.5f}" for name in ("smc", "sc", "rmc", "apmc"))
    print(f"{times[k]:6.1f}  {analytic[k]:.5f}   {row}")

final_errors = {name: curves[name][-1] - analytic[-1] for name in curves}
print("\nerror at t=10s (simulated - analytic):")
for name, err in final_errors.items():
    print(f"  {name:>4}: {err:+.5f}")
print("\nsmc misses intra-step hits (negative error); rmc lands closest in "
      "this regime; apmc overshoots, its strength is the opposite regime "
      "(small radius or long steps - try fig3b or fig4b via the CLI).")
