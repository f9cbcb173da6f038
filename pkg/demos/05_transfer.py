# Optimise one spin-glass instance, then reuse its schedule unchanged on
# other instances of the same class.
import numpy as np

from lhzanneal.experiments import ExperimentConfig, transfer_experiment
from lhzanneal.instances import InstanceSpec, ensemble

cfg = ExperimentConfig(model="spinglass", N=5, T=20.0, S=3, D=4, iterations=10, dt=0.004)
donor = InstanceSpec("spinglass", 5, seed=7)
recipients = ensemble(2000, 10)

sched, rows = transfer_experiment(donor, recipients, cfg)
print("donor schedule a =", sched.a.round(4))
for r in rows:
    print(f"{r.id:22s}  linear {r.fidelity_linear:.4f}  transferred {r.fidelity_transfer:.4f}")
print("median linear     :", np.median([r.fidelity_linear for r in rows]).round(4))
print("median transferred:", np.median([r.fidelity_transfer for r in rows]).round(4))
