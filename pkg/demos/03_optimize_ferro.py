# Variational optimisation of the constraint schedule for the ferromagnet,
# followed by gap and occupation diagnostics of the three schedules.
# A coarser step than the default keeps this under a minute; set DT = None
# for the default step.
from lhzanneal.experiments import ExperimentConfig, run_single

DT = 0.002

cfg = ExperimentConfig(model="ferro", N=5, J=0.5, T=10.0, S=3, D=4, iterations=10, dt=DT, samples=41)
res = run_single(cfg)

print(" m      <E>        F     evaluations")
for r in res.trace.records:
    print(f"{r.m:2d}  {r.energy:+.5f}  {r.fidelity:.5f}  {r.evaluations:4d}")
print("status:", res.trace.status)

sched = res.optimized
print("\noptimised C(s) coefficients a_1..a_4:", sched.a.round(4))
print("interior critical points:", sched.interior_critical_points().round(3))
print("monotonic:", sched.is_monotonic())

print("\nschedule     min gap (at s)     final ground occupation")
for name, table in res.curves.items():
    s, gap = table.min_gap
    print(f"{name:>10}   {gap:.4f} ({s:.3f})      {table.ground_probability[-1]:.4f}")

# ground occupation along the optimised anneal: dips mid-way, then recovers
table = res.curves["optimized"]
for s, p in zip(table.s[::5], table.ground_probability[::5]):
    print(f"  s={s:.3f}  p0={p:.4f}")
