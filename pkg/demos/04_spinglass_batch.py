# A small spin-glass ensemble: linear baseline against the optimised
# schedule, with the fidelity histogram and improvement statistics.
import numpy as np

from lhzanneal.experiments import ExperimentConfig, fidelity_histogram, run_batch

cfg = ExperimentConfig(model="spinglass", N=5, seed=1000, instances=8, T=20.0, S=3, D=4,
                       iterations=10, dt=0.004, track_samples=5)
batch = run_batch(cfg)

print("id                      F_lin    F_opt   improvement  bound")
for r in batch.records:
    print(f"{r.id:22s}  {r.fidelity_linear:.4f}  {r.fidelity_optimized:.4f}"
          f"   {r.improvement:8.4f}  {r.upper_bound:8.4f}")

for key, val in batch.summary().items():
    print(f"{key:28s} {val}")

edges, counts = fidelity_histogram([r.fidelity_optimized for r in batch.records])
print("\noptimised fidelity histogram (non-empty bins):")
for lo, hi, n in zip(edges[:-1], edges[1:], counts):
    if n:
        print(f"  [{lo:.2f}, {hi:.2f})  {'#' * int(n)}")

# instantaneous ground occupation along the optimised anneals
track = np.array([r.track_p for r in batch.records])
print("\nmedian p0 at s =", batch.records[0].track_s, ":", np.median(track, axis=0).round(3))
