"""Time-dependent annealing Hamiltonian on the physical qubits.

    H(s) = (1 - s) * sum_k X_k  +  s * F  +  C(s) * G

with F = -sum_k J_k Z_k (local fields) and G = -sum_l prod_{k in l} Z_k
(parity constraints).  F and G are diagonal in the computational basis and
stored as length-2**K vectors; the transverse driver is never materialised
except for dense diagnostics on small systems.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .lattice import LhzLayout

MAX_QUBITS = 24
NORM_TOLERANCE = 1e-6


class FeasibilityError(ValueError):
    """Problem too large for state-vector simulation."""


class StateIntegrityError(ValueError):
    """State vector is not normalised."""


@dataclass(frozen=True)
class PhysicalProblem:
    layout: LhzLayout
    J: np.ndarray

    def __post_init__(self):
        J = np.asarray(self.J, dtype=float)
        if J.shape != (self.layout.K,):
            raise ValueError(f"expected {self.layout.K} local fields, got shape {J.shape}")
        J.setflags(write=False)
        object.__setattr__(self, "J", J)

    @property
    def K(self) -> int:
        return self.layout.K


def _z_column(K: int, k: int) -> np.ndarray:
    idx = np.arange(2**K, dtype=np.int64)
    return (1 - 2 * ((idx >> k) & 1)).astype(float)


@dataclass(frozen=True, eq=False)
class HamiltonianBundle:
    problem: PhysicalProblem
    field_diag: np.ndarray
    constraint_diag: np.ndarray
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def K(self) -> int:
        return self.problem.K

    @property
    def dim(self) -> int:
        return 2**self.K

    @cached_property
    def final_diag(self) -> np.ndarray:
        """Diagonal of H(1) with C(1) = 1."""
        d = self.field_diag + self.constraint_diag
        d.setflags(write=False)
        return d

    @cached_property
    def popcount(self) -> np.ndarray:
        idx = np.arange(self.dim, dtype=np.int64)
        pc = np.zeros(self.dim, dtype=np.int64)
        for k in range(self.K):
            pc += (idx >> k) & 1
        return pc

    @cached_property
    def constraint_levels(self) -> np.ndarray:
        """(G + L) / 2 as integers: the count of satisfied plaquettes' complement."""
        L = self.problem.layout.L
        return np.rint((self.constraint_diag + L) / 2).astype(np.int64)

    def driver_dense(self) -> np.ndarray:
        """Dense real matrix of sum_k X_k (small K only)."""
        if "driver" not in self._cache:
            if self.K > 12:
                raise FeasibilityError("dense driver limited to K <= 12")
            n = self.dim
            idx = np.arange(n)
            X = np.zeros((n, n))
            for k in range(self.K):
                X[idx, idx ^ (1 << k)] = 1.0
            self._cache["driver"] = X
        return self._cache["driver"]

    def dense(self, s: float, c: float) -> np.ndarray:
        """Dense real-symmetric H(s) at constraint coefficient ``c``."""
        H = (1.0 - s) * self.driver_dense()
        H[np.diag_indices(self.dim)] += s * self.field_diag + c * self.constraint_diag
        return H

    def diagonal(self, s: float, c: float) -> np.ndarray:
        return s * self.field_diag + c * self.constraint_diag


def build_bundle(problem: PhysicalProblem, max_qubits: int = MAX_QUBITS) -> HamiltonianBundle:
    K = problem.K
    if K > max_qubits:
        raise FeasibilityError(f"K={K} exceeds the state-vector limit of {max_qubits} qubits")
    field_diag = np.zeros(2**K)
    for k in range(K):
        field_diag -= problem.J[k] * _z_column(K, k)
    constraint_diag = np.zeros(2**K)
    for members in problem.layout.plaquettes:
        prod = np.ones(2**K)
        for k in members:
            prod *= _z_column(K, k)
        constraint_diag -= prod
    field_diag.setflags(write=False)
    constraint_diag.setflags(write=False)
    return HamiltonianBundle(problem, field_diag, constraint_diag)


def apply_driver(state: np.ndarray, K: int) -> np.ndarray:
    """sum_k X_k |state>: swap amplitudes across each bit."""
    out = np.zeros_like(state)
    for k in range(K):
        out += state.reshape(-1, 2, 2**k)[:, ::-1, :].reshape(-1)
    return out


def _check_dim(bundle: HamiltonianBundle, state: np.ndarray):
    if state.shape != (bundle.dim,):
        raise ValueError(f"state must have shape ({bundle.dim},), got {state.shape}")


def apply_hamiltonian(
    bundle: HamiltonianBundle, s: float, c: float, state: np.ndarray, out: np.ndarray | None = None
) -> np.ndarray:
    """Return H(s)|state> with constraint coefficient ``c``."""
    state = np.asarray(state)
    _check_dim(bundle, state)
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"normalised time s must lie in [0, 1], got {s}")
    result = bundle.diagonal(s, c) * state
    if s != 1.0:
        result = result + (1.0 - s) * apply_driver(state, bundle.K)
    if out is not None:
        out[...] = result
        return out
    return result


def energy_expectation(bundle: HamiltonianBundle, s: float, c: float, state: np.ndarray) -> float:
    state = np.asarray(state)
    _check_dim(bundle, state)
    norm = np.linalg.norm(state)
    if abs(norm - 1.0) > NORM_TOLERANCE:
        raise StateIntegrityError(f"state norm {norm!r} deviates from 1")
    value = np.vdot(state, apply_hamiltonian(bundle, s, c, state))
    assert abs(value.imag) < 1e-10, value
    return float(value.real)


def final_energy(bundle: HamiltonianBundle, state: np.ndarray) -> float:
    """<state|H(1)|state>, the variational objective."""
    return float(np.dot(np.abs(state) ** 2, bundle.final_diag))
