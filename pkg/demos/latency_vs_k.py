"""
Latency as the problem grows
============================

Expected completion time for each scheme as k grows, with the default
cluster (b=20, c=50, sigma=7, p=50, mu=1) and as many stragglers as the
array code can absorb.  Simulation and closed form side by side.
"""

# %%
from coded_matmul.experiments import Scenario, run_scenario

scenario = Scenario(name="demo", values=(100, 500, 1000), trials=2_000, seed=1)
rows = run_scenario(scenario)

print(f"{'k':>5} {'scheme':>8} {'simulated':>12} {'closed form':>12} {'encode':>10} {'parallel':>9} {'decode':>10}")
for r in rows:
    print(f"{r['k']:>5} {r['scheme']:>8} {r['mc_mean']:>12.4g} {r['closed_harmonic']:>12.4g} "
          f"{r['mc_encode']:>10.4g} {r['mc_parallel']:>9.4g} {r['mc_decode']:>10.4g}")

# %%
# Where the time goes
# -------------------
# Polynomial and MatDot codes pay for encoding and interpolation on the
# master.  The array code has no master-side encoding and decodes with
# sigma k b subtractions, so its cost is almost all cluster time plus a
# linear decode.  Uncoded is fastest in this model because nothing is
# charged to the master at all.
