"""LHZ parity layout.

Each pair of logical spins (i, j), i < j, becomes one physical qubit whose
z value is the product of the two logical spins.  Consistency between
physical qubits is enforced by closed loops of three or four qubits
(plaquettes) whose product must be +1.

Logical spins are labelled 1..N.  Physical qubits are numbered 0..K-1 in
lexicographic order of their (i, j) pair.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

MAX_ENUMERATION_QUBITS = 24


class LayoutError(ValueError):
    """Invalid layout size or infeasible enumeration."""


@dataclass(frozen=True)
class LogicalProblem:
    """All-to-all Ising couplings J_ij over N logical spins."""

    N: int
    couplings: dict[tuple[int, int], float]

    def __post_init__(self):
        if self.N < 3:
            raise LayoutError(f"need N >= 3 logical spins, got {self.N}")
        expected = set(itertools.combinations(range(1, self.N + 1), 2))
        if set(self.couplings) != expected:
            raise LayoutError(
                f"couplings must cover exactly the {len(expected)} pairs i<j of 1..{self.N}"
            )


@dataclass(frozen=True)
class LhzLayout:
    N: int
    K: int
    L: int
    pairs: tuple[tuple[int, int], ...]
    plaquettes: tuple[tuple[int, ...], ...]
    qubit_index: dict[tuple[int, int], int] = field(repr=False, compare=False)

    def index(self, i: int, j: int) -> int:
        """Physical qubit index of logical pair (i, j), order-insensitive."""
        if i > j:
            i, j = j, i
        return self.qubit_index[(i, j)]

    def plaquettes_of(self, k: int) -> list[int]:
        """Indices of the plaquettes containing physical qubit ``k``."""
        return [l for l, members in enumerate(self.plaquettes) if k in members]

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "K": self.K,
            "L": self.L,
            "pairs": [list(p) for p in self.pairs],
            "plaquettes": [list(p) for p in self.plaquettes],
        }

    def problem_couplings(self, logical: LogicalProblem) -> np.ndarray:
        """Physical local fields J_k carrying the logical couplings J_ij."""
        if logical.N != self.N:
            raise LayoutError(f"logical size {logical.N} does not match layout N={self.N}")
        return np.array([logical.couplings[p] for p in self.pairs], dtype=float)


def build_layout(N: int) -> LhzLayout:
    """Construct the parity layout for ``N`` logical spins.

    Boundary constraints are explicit 3-body loops
    {(i,i+1), (i,i+2), (i+1,i+2)}; the bulk ones are the 4-body squares
    {(i,j), (i,j+1), (i+1,j), (i+1,j+1)} for j >= i+2.
    """
    if int(N) != N or N < 3:
        raise LayoutError(f"need an integer N >= 3, got {N!r}")
    N = int(N)
    pairs = tuple(itertools.combinations(range(1, N + 1), 2))
    qubit_index = {p: k for k, p in enumerate(pairs)}

    plaquettes: list[tuple[int, ...]] = []
    for i in range(1, N - 1):
        plaquettes.append(
            (qubit_index[(i, i + 1)], qubit_index[(i, i + 2)], qubit_index[(i + 1, i + 2)])
        )
        for j in range(i + 2, N):
            plaquettes.append(
                (
                    qubit_index[(i, j)],
                    qubit_index[(i, j + 1)],
                    qubit_index[(i + 1, j)],
                    qubit_index[(i + 1, j + 1)],
                )
            )

    K = len(pairs)
    L = len(plaquettes)
    assert K == N * (N - 1) // 2 and L == (N - 1) * (N - 2) // 2
    return LhzLayout(
        N=N, K=K, L=L, pairs=pairs, plaquettes=tuple(plaquettes), qubit_index=qubit_index
    )


def _as_spins(values: Sequence[int], length: int, what: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.int8)
    if arr.shape != (length,):
        raise LayoutError(f"{what} configuration must have length {length}, got {arr.shape}")
    if not np.all(np.abs(arr) == 1):
        raise LayoutError(f"{what} configuration entries must be +1 or -1")
    return arr


def encode(layout: LhzLayout, logical: Sequence[int]) -> np.ndarray:
    """Physical configuration with z_(i,j) = x_i * x_j."""
    x = _as_spins(logical, layout.N, "logical")
    return np.array([x[i - 1] * x[j - 1] for i, j in layout.pairs], dtype=np.int8)


def plaquette_products(layout: LhzLayout, physical: Sequence[int]) -> np.ndarray:
    z = np.asarray(physical, dtype=np.int8)
    return np.array([np.prod(z[list(members)]) for members in layout.plaquettes], dtype=np.int8)


@dataclass(frozen=True)
class DecodeResult:
    """Outcome of :func:`decode`.

    ``logical`` is set when every plaquette is satisfied; otherwise
    ``violated`` lists the failing plaquette indices.
    """

    logical: np.ndarray | None
    violated: tuple[int, ...] = ()

    @property
    def ok(self) -> bool:
        return self.logical is not None


def decode(layout: LhzLayout, physical: Sequence[int]) -> DecodeResult:
    """Recover the logical configuration, gauge-fixed to x_1 = +1."""
    z = _as_spins(physical, layout.K, "physical")
    products = plaquette_products(layout, z)
    violated = tuple(int(l) for l in np.flatnonzero(products != 1))
    if violated:
        return DecodeResult(logical=None, violated=violated)
    x = np.empty(layout.N, dtype=np.int8)
    x[0] = 1
    for j in range(2, layout.N + 1):
        x[j - 1] = z[layout.index(1, j)]
    return DecodeResult(logical=x)


def basis_spins(K: int) -> np.ndarray:
    """z values of every computational basis state, shape (2**K, K).

    Bit k of the basis index is qubit k; bit 0 means z = +1.
    """
    b = np.arange(2**K, dtype=np.int64)[:, None]
    bits = (b >> np.arange(K, dtype=np.int64)) & 1
    return (1 - 2 * bits).astype(np.int8)


def satisfying_configs(layout: LhzLayout) -> np.ndarray:
    """All physical configurations with every plaquette product +1."""
    if layout.K > MAX_ENUMERATION_QUBITS:
        raise LayoutError(
            f"enumeration over 2^{layout.K} configurations exceeds the "
            f"{MAX_ENUMERATION_QUBITS}-qubit limit"
        )
    z = basis_spins(layout.K)
    ok = np.ones(len(z), dtype=bool)
    for members in layout.plaquettes:
        ok &= np.prod(z[:, list(members)], axis=1) == 1
    return z[ok]


def count_satisfying_configs(layout: LhzLayout) -> int:
    return int(len(satisfying_configs(layout)))
