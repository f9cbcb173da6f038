"""Constraint-term schedule C(s), s = t/T.

The variational parameters are S interior samples c_n = C(n/(S+1)); the
endpoints C(0) = 0 and C(1) = 1 are fixed and never stored.  The
continuous schedule is a polynomial without constant term whose linear
coefficient is tied to the others so that C(1) = 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SchedulePoints:
    c: np.ndarray

    def __post_init__(self):
        c = np.array(self.c, dtype=float).reshape(-1)
        if c.size < 1:
            raise ValueError("need at least one interior point")
        c.setflags(write=False)
        object.__setattr__(self, "c", c)

    @property
    def S(self) -> int:
        return self.c.size

    @property
    def s(self) -> np.ndarray:
        """Normalised times n/(S+1) of the interior points."""
        return np.arange(1, self.S + 1) / (self.S + 1)


@dataclass(frozen=True)
class PolySchedule:
    """C(s) = sum_{d=1}^{D} a_d s^d with a_1 = 1 - sum_{d>=2} a_d.

    ``residual`` is the least-squares misfit to the points the schedule was
    fitted from, and ``rank_deficient`` flags a minimum-norm solution.
    """

    a: np.ndarray
    residual: float = 0.0
    rank_deficient: bool = False

    def __post_init__(self):
        a = np.array(self.a, dtype=float).reshape(-1)
        if a.size < 1:
            raise ValueError("need at least the linear coefficient")
        a.setflags(write=False)
        object.__setattr__(self, "a", a)

    @property
    def D(self) -> int:
        return self.a.size

    @classmethod
    def from_free(cls, higher: np.ndarray, **kw) -> "PolySchedule":
        """Build from a_2..a_D, deriving a_1 from the endpoint constraint."""
        higher = np.asarray(higher, dtype=float)
        return cls(np.concatenate([[1.0 - higher.sum()], higher]), **kw)

    @classmethod
    def linear(cls) -> "PolySchedule":
        return cls(np.array([1.0]))

    @classmethod
    def power(cls, p: int) -> "PolySchedule":
        """C(s) = s**p."""
        if p < 1:
            raise ValueError("power must be >= 1")
        a = np.zeros(p)
        a[-1] = 1.0
        return cls(a)

    def __call__(self, s):
        return evaluate(self, s)

    def derivative(self, s):
        """C'(s)."""
        d = np.arange(1, self.D + 1)
        return np.polynomial.polynomial.polyval(np.asarray(s, dtype=float), self.a * d)

    def is_monotonic(self, grid: int = 2001) -> bool:
        """True when C'(s) does not change sign on [0, 1]."""
        s = np.linspace(0.0, 1.0, grid)
        dC = np.diff(self(s))
        return bool(np.all(dC >= -1e-12) or np.all(dC <= 1e-12))

    def interior_critical_points(self) -> np.ndarray:
        """Real roots of C'(s) strictly inside (0, 1) where C' changes sign."""
        if self.D < 2:
            return np.array([])
        # C' in increasing powers: a_d * d * s**(d-1)
        roots = np.polynomial.polynomial.polyroots(self.a * np.arange(1, self.D + 1))
        real = np.sort(roots[np.abs(roots.imag) < 1e-9].real)
        inside = real[(real > 0.0) & (real < 1.0)]
        eps = 1e-6
        return np.array(
            [r for r in inside if self.derivative(r - eps) * self.derivative(r + eps) < 0]
        )

    def to_dict(self) -> dict:
        return {
            "a": [float(x) for x in self.a],
            "residual": float(self.residual),
            "rank_deficient": bool(self.rank_deficient),
        }


def evaluate(sched: PolySchedule, s):
    """Horner evaluation of sum_d a_d s**d."""
    s = np.asarray(s, dtype=float)
    acc = np.zeros_like(s)
    for coef in sched.a[::-1]:
        acc = (acc + coef) * s
    return acc if acc.ndim else float(acc)


def initial_points(S: int) -> SchedulePoints:
    """Samples of the linear schedule, c_n = n/(S+1)."""
    if S < 1:
        raise ValueError("S must be >= 1")
    return SchedulePoints(np.arange(1, S + 1) / (S + 1))


def fit(points: SchedulePoints, D: int) -> PolySchedule:
    """Least-squares fit of a degree-``D`` pinned polynomial to ``points``.

    With a_1 eliminated the model is C(s) - s = sum_{d=2}^{D} a_d (s^d - s),
    so the free coefficients solve an ordinary least-squares problem.  An
    SVD-based solve returns the minimum-norm solution when D - 1 > S.
    """
    if D < 2:
        raise ValueError(f"degree D must be >= 2 to leave free coefficients, got {D}")
    s = points.s
    y = points.c - s
    basis = np.stack([s**d - s for d in range(2, D + 1)], axis=1)
    higher, _, rank, _ = np.linalg.lstsq(basis, y, rcond=None)
    misfit = basis @ higher - y
    return PolySchedule.from_free(
        higher,
        residual=float(np.sqrt(np.sum(misfit**2))),
        rank_deficient=bool(rank < D - 1),
    )
