import numpy as np
import pytest
from scipy.integrate import solve_ivp

from lhzanneal.dynamics import (
    EvolutionConfig,
    IntegrationError,
    cross_validate,
    evolve,
    evolve_frozen,
    initial_state,
)
from lhzanneal.hamiltonian import PhysicalProblem, build_bundle, energy_expectation
from lhzanneal.lattice import LhzLayout, build_layout
from lhzanneal.schedule import PolySchedule
from lhzanneal.spectrum import fidelity

from conftest import random_bundle

LINEAR = PolySchedule.linear()


def one_qubit_bundle(J):
    layout = LhzLayout(N=2, K=1, L=0, pairs=((1, 2),), plaquettes=(), qubit_index={(1, 2): 0})
    return build_bundle(PhysicalProblem(layout, np.array([J])))


def test_initial_state():
    assert np.allclose(initial_state(1), [1 / np.sqrt(2), -1 / np.sqrt(2)], atol=1e-16)
    psi = initial_state(10)
    assert abs(np.linalg.norm(psi) - 1) < 1e-15
    assert psi[0] > 0 and psi[1] < 0 and psi[3] > 0


def test_initial_energy(ferro5):
    assert abs(energy_expectation(ferro5, 0.0, 0.0, initial_state(10)) + 10) < 1e-12


def test_config_validation():
    with pytest.raises(ValueError):
        EvolutionConfig(T=0)
    with pytest.raises(ValueError):
        EvolutionConfig(T=1.0, dt=2.0)
    with pytest.raises(ValueError):
        EvolutionConfig(T=1.0, method="euler")
    assert EvolutionConfig(T=10).nsteps == 20000
    assert EvolutionConfig(T=20).nsteps == 20000
    assert EvolutionConfig(T=500).nsteps == 500000


@pytest.mark.parametrize("method", ["fast", "reference"])
def test_frozen_diagonal_is_pure_phase(ferro5, rng, method):
    tau = 0.7
    for b in rng.integers(0, 1024, 5):
        e = np.zeros(1024, dtype=complex)
        e[b] = 1
        out = evolve_frozen(ferro5, 1.0, 1.0, e, tau, 200, method).final_state
        E = ferro5.field_diag[b] + ferro5.constraint_diag[b]
        assert abs(out[b] - np.exp(-1j * E * tau)) < 1e-8
        out[b] = 0
        assert np.max(np.abs(out)) < 1e-12


@pytest.mark.parametrize("method", ["fast", "reference"])
def test_one_qubit_without_field_is_analytic(method):
    # |-> is an eigenstate of (1 - s) X for every s: only a phase exp(+i T/2) accrues
    bundle = one_qubit_bundle(0.0)
    T = 3.0
    psi = evolve(bundle, LINEAR, EvolutionConfig(T=T, method=method)).final_state
    assert np.max(np.abs(psi - np.exp(0.5j * T) * initial_state(1))) < 1e-10


@pytest.mark.parametrize("method", ["fast", "reference"])
def test_one_qubit_against_dense_oracle(method):
    J, T = 0.3, 5.0
    bundle = one_qubit_bundle(J)
    X = np.array([[0, 1], [1, 0]], dtype=complex)
    Z = np.diag([1.0, -1.0]).astype(complex)

    def rhs(t, y):
        s = t / T
        return -1j * (((1 - s) * X - s * J * Z) @ y)

    sol = solve_ivp(rhs, (0, T), initial_state(1), method="DOP853", rtol=1e-12, atol=1e-13)
    psi = evolve(bundle, LINEAR, EvolutionConfig(T=T, method=method)).final_state
    assert np.max(np.abs(psi - sol.y[:, -1])) < 1e-6


def test_cross_validate_default(ferro5):
    cfg = EvolutionConfig(T=10.0)
    assert cross_validate(ferro5, LINEAR, cfg) < 1e-6


def test_splitting_error_is_second_order(ferro5):
    coarse = cross_validate(ferro5, LINEAR, EvolutionConfig(T=10.0, dt=10 / 4000))
    fine = cross_validate(ferro5, LINEAR, EvolutionConfig(T=10.0, dt=10 / 8000))
    assert coarse / fine >= 4 * 0.95
    assert coarse / fine < 4.5


def test_zero_time(ferro5):
    cfg = EvolutionConfig(T=1e-9, dt=1e-9)
    assert cfg.nsteps == 1
    assert cross_validate(ferro5, LINEAR, cfg) < 1e-10
    psi = evolve(ferro5, LINEAR, cfg).final_state
    assert np.max(np.abs(psi - initial_state(10))) < 1e-7


def test_norm_conservation(ferro5):
    sched = PolySchedule(np.array([3.0, -2.0]))
    ref = evolve(ferro5, sched, EvolutionConfig(T=10.0, method="reference"))
    fast = evolve(ferro5, sched, EvolutionConfig(T=10.0, method="fast"))
    assert ref.norm_drift < 1e-8
    assert fast.norm_drift < 1e-12


def test_integration_failure_reported(ferro5):
    with pytest.raises(IntegrationError):
        evolve(ferro5, LINEAR, EvolutionConfig(T=10.0, dt=0.5, method="reference"))


def test_snapshots(ferro5):
    times = (0.0, 0.25, 0.5, 1.0, 0.25)
    res = evolve(ferro5, LINEAR, EvolutionConfig(T=10.0, record_times=times))
    assert [s for s, _ in res.snapshots] == list(times)
    assert np.allclose(res.snapshots[0][1], initial_state(10), atol=1e-15)
    assert np.array_equal(res.snapshots[1][1], res.snapshots[4][1])
    assert np.allclose(res.snapshots[3][1], res.final_state, atol=1e-12)
    for _, v in res.snapshots:
        assert abs(np.linalg.norm(v) - 1) < 1e-14


def test_snapshot_does_not_perturb_final_state(ferro5):
    plain = evolve(ferro5, LINEAR, EvolutionConfig(T=10.0)).final_state
    snapped = evolve(ferro5, LINEAR, EvolutionConfig(T=10.0, record_times=(0.3, 0.6))).final_state
    assert np.max(np.abs(plain - snapped)) < 1e-13


def test_energy_continuity(ferro5):
    sched = PolySchedule(np.array([3.0, -2.0]))
    times = tuple(np.linspace(0, 1, 100))
    res = evolve(ferro5, sched, EvolutionConfig(T=10.0, record_times=times))
    E = np.array([energy_expectation(ferro5, s, sched(s), v) for s, v in res.snapshots])
    d = np.abs(np.diff(E))
    for i in range(1, len(d) - 1):
        assert d[i] <= 10 * max(d[i - 1], d[i + 1]) + 1e-9


def test_determinism(ferro5):
    cfg = EvolutionConfig(T=10.0, dt=0.002)
    a = evolve(ferro5, LINEAR, cfg).final_state
    b = evolve(ferro5, LINEAR, cfg).final_state
    assert np.array_equal(a, b)


def test_adiabatic_small_system():
    bundle = random_bundle(4, seed=2)
    psi = evolve(bundle, LINEAR, EvolutionConfig(T=300.0)).final_state
    assert fidelity(bundle, psi) > 0.99
