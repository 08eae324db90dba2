"""
Paying in bandwidth for speed
=============================

The asymptotic array code tolerates many more stragglers than the
rectangular one, at the price of extra symbols on both links.  Sweep k for
a few overheads and look at where each curve sits.
"""

# %%
from coded_matmul.arraycode import build_asym_code, max_blocklength_asym, validate_sampled
from coded_matmul.comm import comm_symbols, normalized_overhead_asym
from coded_matmul.experiments import Scenario, run_scenario

for eps in (3.0, 4.0, 5.0):
    sc = Scenario(name=f"eps{eps:g}", schemes=("asym",), sweep="comm_cost", values=(100, 300, 1000),
                  b=50, epsilon=eps, stragglers="asym_bound", trials=1_000)
    for r in run_scenario(sc):
        print(f"eps={eps:g} k={r['k']:>5} n={r['n']:>5} cost={r['x']:.3f} E[T]={r['mc_mean']:.4g}")

# %%
# The four schemes at one operating point
# ---------------------------------------

for scheme, n, eps in [("poly", 137, 0), ("matdot", 137, 0), ("amds", 106, 0), ("asym", 137, 3)]:
    c = comm_symbols(scheme, 100, n, 100, epsilon=eps)
    print(f"{scheme:>7}: master->slave {c.normalized_overhead_ms:7.2f}  slave->master {c.normalized_overhead_sm:7.2f}")
print("asym trade-off coordinate:", normalized_overhead_asym(137, 100, 3).total)

# %%
# A small randomized code
# -----------------------
# Built with a truncated soliton degree profile, then repaired until every
# sampled k-subset of columns peels.

code = build_asym_code(12, 10, 4, 0.5, seed=0, samples=300)
check = validate_sampled(code, 300)
print("column sizes:", code.column_sizes, "epsilon:", code.epsilon, "max degree:", code.sigma)
print("all", check.checked, "subsets peel" if check.ok else "subsets checked, some fail")
print("bound at k=100, b=50, eps=3:", max_blocklength_asym(100, 50, 7, 3))
