import itertools
from functools import reduce

import numpy as np
import pytest

from lhzanneal.dynamics import initial_state
from lhzanneal.hamiltonian import (
    FeasibilityError,
    PhysicalProblem,
    StateIntegrityError,
    apply_hamiltonian,
    build_bundle,
    energy_expectation,
)
from lhzanneal.lattice import build_layout, encode

from conftest import random_bundle

X = np.array([[0.0, 1.0], [1.0, 0.0]])
Z = np.diag([1.0, -1.0])
I2 = np.eye(2)


def single(op, k, K):
    # qubit k sits on bit k of the basis index: rightmost Kronecker factor is qubit 0
    factors = [op if q == k else I2 for q in reversed(range(K))]
    return reduce(np.kron, factors)


def dense_oracle(bundle, s, c):
    layout = bundle.problem.layout
    K = layout.K
    H = (1 - s) * sum(single(X, k, K) for k in range(K))
    H = H - s * sum(bundle.problem.J[k] * single(Z, k, K) for k in range(K))
    for members in layout.plaquettes:
        H = H - c * reduce(np.matmul, [single(Z, k, K) for k in members])
    return H


def random_state(dim, rng):
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def test_ferro_all_up_values(ferro5):
    assert ferro5.field_diag[0] == -5.0
    assert ferro5.constraint_diag[0] == -6.0


def test_zero_fields():
    layout = build_layout(4)
    b = build_bundle(PhysicalProblem(layout, np.zeros(layout.K)))
    assert np.all(b.field_diag == 0)


def test_single_violation_costs_two(ferro5):
    layout = ferro5.problem.layout
    for x in itertools.product((1, -1), repeat=5):
        z = encode(layout, x)
        b_sat = int(sum((1 << k) for k in range(10) if z[k] == -1))
        for k in range(10):
            b = b_sat ^ (1 << k)
            violated = len(layout.plaquettes_of(k))
            assert ferro5.constraint_diag[b] == ferro5.constraint_diag[b_sat] + 2 * violated
    # qubit (1,2) touches a single plaquette
    assert ferro5.constraint_diag[1] == ferro5.constraint_diag[0] + 2


@pytest.mark.parametrize("N", [3, 4])
def test_dense_oracle(N, rng):
    bundle = random_bundle(N, seed=N)
    for _ in range(20):
        s, c = rng.uniform(0, 1), rng.uniform(-1, 2)
        H = dense_oracle(bundle, s, c)
        assert np.max(np.abs(H - bundle.dense(s, c))) < 1e-12
        v = random_state(bundle.dim, rng)
        assert np.max(np.abs(apply_hamiltonian(bundle, s, c, v) - H @ v)) < 1e-12


def test_eigenvector_at_end(ferro5, rng):
    for b in rng.integers(0, 1024, 10):
        e = np.zeros(1024, dtype=complex)
        e[b] = 1
        out = apply_hamiltonian(ferro5, 1.0, 1.0, e)
        assert np.allclose(out, (ferro5.field_diag[b] + ferro5.constraint_diag[b]) * e, atol=0)


def test_driver_eigenstate(ferro5):
    psi = initial_state(10)
    assert np.max(np.abs(apply_hamiltonian(ferro5, 0.0, 0.0, psi) + 10 * psi)) < 1e-12


def test_linearity(ferro5, rng):
    u, v = random_state(1024, rng), random_state(1024, rng)
    alpha, beta = 0.3 - 1.1j, -2.0 + 0.5j
    s, c = 0.37, 0.81
    lhs = apply_hamiltonian(ferro5, s, c, alpha * u + beta * v)
    rhs = alpha * apply_hamiltonian(ferro5, s, c, u) + beta * apply_hamiltonian(ferro5, s, c, v)
    assert np.max(np.abs(lhs - rhs)) < 1e-12


def test_hermiticity(rng):
    bundle = random_bundle(5, seed=3)
    for _ in range(5):
        s, c = rng.uniform(0, 1), rng.uniform(-1, 2)
        u, v = random_state(1024, rng), random_state(1024, rng)
        lhs = np.vdot(u, apply_hamiltonian(bundle, s, c, v))
        rhs = np.conj(np.vdot(v, apply_hamiltonian(bundle, s, c, u)))
        assert abs(lhs - rhs) < 1e-12


def test_energy_examples(ferro5):
    e0 = np.zeros(1024, dtype=complex)
    e0[0] = 1
    assert energy_expectation(ferro5, 1.0, 1.0, e0) == -11.0
    assert abs(energy_expectation(ferro5, 0.0, 0.0, initial_state(10)) + 10) < 1e-12


def test_energy_within_spectrum(rng):
    bundle = random_bundle(3, seed=11)
    for _ in range(10):
        s, c = rng.uniform(0, 1), rng.uniform(-1, 2)
        w = np.linalg.eigvalsh(dense_oracle(bundle, s, c))
        psi = random_state(8, rng) * np.exp(1j * rng.uniform(0, 2 * np.pi, 8))
        psi /= np.linalg.norm(psi)
        e = energy_expectation(bundle, s, c, psi)
        assert w[0] - 1e-12 <= e <= w[-1] + 1e-12


def test_energy_rejects_unnormalised(ferro5):
    with pytest.raises(StateIntegrityError):
        energy_expectation(ferro5, 0.5, 0.5, 2 * initial_state(10))


def test_dimension_mismatch(ferro5):
    with pytest.raises(ValueError):
        apply_hamiltonian(ferro5, 0.5, 0.5, np.ones(8))


def test_ferro_final_ground_state(ferro5):
    K, L = 10, 6
    final = ferro5.field_diag + ferro5.constraint_diag
    assert final.min() == -(0.5 * K + L)
    assert np.flatnonzero(final == final.min()).tolist() == [0]


def test_feasibility_error():
    layout = build_layout(5)
    with pytest.raises(FeasibilityError):
        build_bundle(PhysicalProblem(layout, np.zeros(10)), max_qubits=8)
