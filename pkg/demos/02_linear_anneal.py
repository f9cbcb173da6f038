# Anneal the ferromagnet (all J_k = 0.5) with a linear constraint schedule
# and compare the two integrators.
import time

from lhzanneal import EvolutionConfig, PolySchedule, build_bundle, evolve, fidelity
from lhzanneal.dynamics import cross_validate
from lhzanneal.instances import InstanceSpec, generate
from lhzanneal.spectrum import ground_energy
from lhzanneal.hamiltonian import final_energy

bundle = build_bundle(generate(InstanceSpec("ferro", 5, J_value=0.5)))
linear = PolySchedule.linear()
print("final ground energy:", ground_energy(bundle))

for T in (2.0, 10.0, 50.0, 200.0):
    t0 = time.perf_counter()
    res = evolve(bundle, linear, EvolutionConfig(T=T))
    psi = res.final_state
    print(f"T={T:6.1f}  <E>={final_energy(bundle, psi):+.5f}  F={fidelity(bundle, psi):.5f}"
          f"  drift={res.norm_drift:.1e}  ({time.perf_counter() - t0:.2f} s)")

# split-operator vs RK4 at the default step
dev = cross_validate(bundle, linear, EvolutionConfig(T=10.0))
print("\nmax amplitude difference split vs RK4 at T=10:", f"{dev:.2e}")
