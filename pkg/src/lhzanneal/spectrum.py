"""Instantaneous eigen-analysis of H(s).

Levels closer than ``DEGENERACY_TOL`` are grouped so that occupation
probabilities do not depend on how a degenerate eigensolver picks its
basis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh

from .hamiltonian import HamiltonianBundle, apply_hamiltonian
from .schedule import PolySchedule

DEGENERACY_TOL = 1e-9
DENSE_LIMIT = 4096
RESIDUAL_TOL = 1e-8


class EigensolverError(RuntimeError):
    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals


@dataclass
class SpectrumSlice:
    s: float
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns
    degeneracy_groups: list[list[int]]

    @property
    def group_energies(self) -> np.ndarray:
        return np.array([self.eigenvalues[g[0]] for g in self.degeneracy_groups])


@dataclass
class GapCurve:
    s: np.ndarray
    gap: np.ndarray

    @property
    def min_gap(self) -> tuple[float, float]:
        i = int(np.argmin(self.gap))
        return float(self.s[i]), float(self.gap[i])


def group_levels(eigenvalues: np.ndarray, tol: float = DEGENERACY_TOL) -> list[list[int]]:
    """Partition ascending eigenvalues into runs of near-equal levels."""
    groups: list[list[int]] = []
    for i, e in enumerate(eigenvalues):
        if groups and abs(e - eigenvalues[groups[-1][-1]]) < tol:
            groups[-1].append(i)
        else:
            groups.append([i])
    return groups


def _diagonal_spectrum(bundle, s, c, m):
    diag = bundle.diagonal(s, c)
    order = np.argsort(diag, kind="stable")[:m]
    vecs = np.zeros((bundle.dim, len(order)))
    vecs[order, np.arange(len(order))] = 1.0
    return diag[order], vecs


def _iterative_spectrum(bundle, s, c, m, seed=0):
    op = LinearOperator(
        (bundle.dim, bundle.dim),
        matvec=lambda v: apply_hamiltonian(bundle, s, c, np.asarray(v, dtype=float).ravel()),
        dtype=float,
    )
    v0 = np.random.default_rng(seed).standard_normal(bundle.dim)
    try:
        vals, vecs = eigsh(op, k=m, which="SA", v0=v0, tol=1e-12, maxiter=100 * bundle.dim)
    except ArpackNoConvergence as exc:
        raise EigensolverError(
            f"Lanczos failed to converge at s={s}", residuals=getattr(exc, "eigenvalues", None)
        ) from exc
    order = np.argsort(vals)
    return vals[order], vecs[:, order]


def instantaneous_spectrum(
    bundle: HamiltonianBundle, s: float, c: float, m: int, seed: int = 0
) -> SpectrumSlice:
    """Lowest ``m`` eigenpairs of H(s) with constraint coefficient ``c``.

    ``seed`` only affects the starting vector of the iterative solver.
    """
    if not 1 <= m <= bundle.dim:
        raise ValueError(f"need 1 <= m <= {bundle.dim}, got {m}")
    if s == 1.0:
        vals, vecs = _diagonal_spectrum(bundle, s, c, m)
    elif bundle.dim <= DENSE_LIMIT:
        vals, vecs = scipy.linalg.eigh(bundle.dense(s, c), subset_by_index=[0, m - 1])
    else:
        if m >= bundle.dim - 1:
            raise ValueError("iterative path needs m < dim - 1")
        vals, vecs = _iterative_spectrum(bundle, s, c, m, seed)
        residuals = [
            np.linalg.norm(apply_hamiltonian(bundle, s, c, vecs[:, i]) - vals[i] * vecs[:, i])
            for i in range(m)
        ]
        if max(residuals) > RESIDUAL_TOL:
            raise EigensolverError(f"eigenpair residuals too large at s={s}", residuals)
    return SpectrumSlice(float(s), vals, vecs, group_levels(vals))


def lowest_groups(bundle: HamiltonianBundle, s: float, c: float, n_groups: int) -> SpectrumSlice:
    """Spectrum slice containing at least ``n_groups`` complete degeneracy groups.

    The eigenpair count is grown until a level beyond the last requested
    group is seen, then the slice is trimmed to exactly those groups.
    """
    m = min(bundle.dim, max(2 * n_groups, 4))
    while True:
        sl = instantaneous_spectrum(bundle, s, c, m)
        if len(sl.degeneracy_groups) > n_groups or m == bundle.dim:
            break
        m = min(bundle.dim, 2 * m)
    groups = sl.degeneracy_groups[:n_groups]
    keep = groups[-1][-1] + 1
    return SpectrumSlice(sl.s, sl.eigenvalues[:keep], sl.eigenvectors[:, :keep], groups)


def occupations(sl: SpectrumSlice, state: np.ndarray) -> np.ndarray:
    """Probability of ``state`` in each degeneracy group of ``sl``."""
    overlaps = np.abs(sl.eigenvectors.conj().T @ state) ** 2
    return np.array([overlaps[g].sum() for g in sl.degeneracy_groups])


def gap_at(bundle: HamiltonianBundle, s: float, c: float) -> float:
    sl = lowest_groups(bundle, s, c, 2)
    e = sl.group_energies
    return float(e[1] - e[0])


def gap_curve(bundle: HamiltonianBundle, sched: PolySchedule, samples: int = 101) -> GapCurve:
    """E_1(s) - E_0(s) on a uniform grid of ``samples`` points in [0, 1]."""
    if samples < 2:
        raise ValueError("need at least two samples")
    s = np.linspace(0.0, 1.0, samples)
    gaps = np.array([gap_at(bundle, si, sched(si)) for si in s])
    return GapCurve(s, gaps)


def ground_space(bundle: HamiltonianBundle, tol: float = DEGENERACY_TOL) -> np.ndarray:
    """Basis indices spanning the ground space of the (diagonal) final Hamiltonian."""
    d = bundle.final_diag
    return np.flatnonzero(d < d.min() + tol)


def ground_energy(bundle: HamiltonianBundle) -> float:
    return float(bundle.final_diag.min())


def fidelity(bundle: HamiltonianBundle, state: np.ndarray, space: np.ndarray | None = None) -> float:
    """Weight of ``state`` on the final ground space, relative to its norm.

    The total is accumulated as inside + outside so the ratio never exceeds 1.
    """
    if space is None:
        space = ground_space(bundle)
    weights = np.abs(state) ** 2
    mask = np.zeros(weights.size, dtype=bool)
    mask[space] = True
    inside = float(np.sum(weights[mask]))
    return inside / (inside + float(np.sum(weights[~mask])))
