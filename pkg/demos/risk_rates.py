"""
Monte Carlo risk decay of the two-stage estimator
=================================================

Runs a small risk experiment over a geometric grid of sample sizes and
fits a power law to the mean integrated squared error of the first
component. With a Sobolev-2 target the theoretical exponent is
-2 alpha / (2 alpha + 1) = -0.8; a short run with 25 replications already
lands close. The acceptance suite repeats this with 200 replications.
"""

import time

from sumspace.harness import fit_rate, run_risk_experiment
from sumspace.sim import ScenarioConfig
from sumspace.spaces import independent_uniform

scenario = ScenarioConfig(
    q=2, n=256, design=independent_uniform(2),
    alpha1=2.0, alpha2=2.0, sigma=0.5, base_seed=0,
)
n_grid = [256, 512, 1024, 2048, 4096]

t0 = time.monotonic()
report = run_risk_experiment(scenario, n_grid, replications=25)
print(f"{len(report.rows)} fits in {time.monotonic() - t0:.1f}s")
print(f"model dimensions by n: {report.meta['dims']}")
print()
print("      n     mean risk    std err     oracle")
for s in report.summary:
    print(f"{s.n:7d}   {s.mean_risk:.5f}     {s.std_error:.5f}    "
          f"{s.oracle_mean_risk:.5f}")

rate = fit_rate(report)
print()
print(rate.to_text())
