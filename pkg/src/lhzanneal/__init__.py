"""Variational optimisation of the parity-constraint schedule in LHZ quantum annealing."""

from .dynamics import EvolutionConfig, cross_validate, evolve, initial_state
from .hamiltonian import (
    HamiltonianBundle,
    PhysicalProblem,
    apply_hamiltonian,
    build_bundle,
    energy_expectation,
)
from .instances import InstanceSpec, generate
from .lattice import LhzLayout, build_layout, count_satisfying_configs, decode, encode
from .schedule import PolySchedule, SchedulePoints, fit, initial_points
from .spectrum import fidelity, gap_curve, ground_space, instantaneous_spectrum, occupations
from .variational import ObjectiveSpec, OptimizerConfig, objective, optimize

__version__ = "0.1.0"
