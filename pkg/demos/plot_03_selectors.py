"""
Choosing the community numbers
==============================

Both selectors walk the candidate pairs in order of k_s + k_r (then k_s).
The level rule stops at the first statistic below t_n.  The ratio rule
stops where the statistic collapses relative to the previous candidate.
"""

from mlnet import (
    GeneratorConfig,
    StatisticEvaluator,
    mldigof_estimate,
    mlrdigof_estimate,
    simulate,
)

pm = simulate(GeneratorConfig(n=400, L=15, K_s=2, K_r=3, rho=0.2, seed=3))
ev = StatisticEvaluator(pm.network, seed=3)

pair, trace = mldigof_estimate(pm.network, evaluator=ev)
print(f"level rule -> {pair}  ({trace.stop_reason}, t_n = {trace.t_n:.3f})")

pair, trace = mlrdigof_estimate(pm.network, evaluator=ev)
print(f"ratio rule -> {pair}  ({trace.stop_reason}, tau_n = {trace.tau_n:.1f})")

# %%
# The trace lists every candidate that was evaluated.
for e in trace.entries:
    r = "" if e.ratio is None else f"{e.ratio:10.2f}"
    print(f"m={e.m:2d} {str(e.pair):7s} T={e.t_hat:8.3f} r={r}{'  <- stop' if e.stopped else ''}")
