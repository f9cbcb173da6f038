"""Hybrid variational loop for the constraint schedule.

Each objective evaluation fits the pinned polynomial to the interior
points, runs one anneal and returns the final-Hamiltonian energy.  BFGS
with a strong-Wolfe line search updates the points; one accepted step is
one outer iteration.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import line_search

from .dynamics import EvolutionConfig, evolve
from .hamiltonian import HamiltonianBundle, final_energy
from .schedule import PolySchedule, SchedulePoints, fit, initial_points
from .spectrum import fidelity, ground_space

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ObjectiveSpec:
    bundle: HamiltonianBundle
    S: int
    D: int
    evolution: EvolutionConfig

    def __post_init__(self):
        if self.S < 1 or self.D < 2:
            raise ValueError(f"need S >= 1 and D >= 2, got S={self.S}, D={self.D}")

    @property
    def T(self) -> float:
        return self.evolution.T


@dataclass(frozen=True)
class OptimizerConfig:
    iterations: int = 10
    h: float = 1e-4
    c1: float = 1e-4
    c2: float = 0.9
    gtol: float = 1e-6
    ftol: float = 0.0
    max_line_search: int = 20

    def __post_init__(self):
        if self.h <= 0:
            raise ValueError("finite-difference step must be positive")
        if self.iterations < 0:
            raise ValueError("iterations must be >= 0")


@dataclass
class IterationRecord:
    m: int
    c: np.ndarray
    a: np.ndarray
    energy: float
    fidelity: float
    evaluations: int

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "c": [float(x) for x in self.c],
            "a": [float(x) for x in self.a],
            "energy": float(self.energy),
            "fidelity": float(self.fidelity),
            "evaluations": int(self.evaluations),
        }


@dataclass
class IterationTrace:
    records: list[IterationRecord] = field(default_factory=list)
    status: str = "running"
    D: int = 0

    @property
    def energies(self) -> np.ndarray:
        return np.array([r.energy for r in self.records])

    @property
    def fidelities(self) -> np.ndarray:
        return np.array([r.fidelity for r in self.records])

    @property
    def final(self) -> IterationRecord:
        return self.records[-1]

    @property
    def final_schedule(self) -> PolySchedule:
        return fit(SchedulePoints(self.final.c), self.D)

    @property
    def total_evaluations(self) -> int:
        return sum(r.evaluations for r in self.records)

    def to_dict(self) -> dict:
        return {"status": self.status, "D": self.D, "records": [r.to_dict() for r in self.records]}


def schedule_for(spec: ObjectiveSpec, c) -> PolySchedule:
    return fit(SchedulePoints(c), spec.D)


def objective(spec: ObjectiveSpec, c) -> tuple[float, np.ndarray]:
    """Final energy <psi(T)|H(1)|psi(T)> under the schedule fitted to ``c``."""
    res = evolve(spec.bundle, schedule_for(spec, c), spec.evolution)
    return final_energy(spec.bundle, res.final_state), res.final_state


def central_gradient(f, x: np.ndarray, h: float) -> np.ndarray:
    """Central finite differences, coordinates in index order."""
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    for n in range(x.size):
        e = np.zeros_like(x)
        e[n] = h
        g[n] = (f(x + e) - f(x - e)) / (2 * h)
    return g


def gradient(spec: ObjectiveSpec, c, h: float = 1e-4) -> np.ndarray:
    return central_gradient(lambda x: objective(spec, x)[0], c, h)


class _Counted:
    """Objective wrapper that caches by parameter bytes and counts simulations."""

    def __init__(self, spec: ObjectiveSpec, h: float):
        self.spec = spec
        self.h = h
        self.calls = 0
        self._values: dict[bytes, tuple[float, np.ndarray]] = {}
        self._grads: dict[bytes, np.ndarray] = {}

    def evaluate(self, x) -> tuple[float, np.ndarray]:
        x = np.ascontiguousarray(x, dtype=float)
        key = x.tobytes()
        if key not in self._values:
            self.calls += 1
            self._values[key] = objective(self.spec, x)
        return self._values[key]

    def f(self, x) -> float:
        return self.evaluate(x)[0]

    def grad(self, x) -> np.ndarray:
        x = np.ascontiguousarray(x, dtype=float)
        key = x.tobytes()
        if key not in self._grads:
            self._grads[key] = central_gradient(self.f, x, self.h)
        return self._grads[key]


def optimize(
    spec: ObjectiveSpec,
    opt: OptimizerConfig = OptimizerConfig(),
    space: np.ndarray | None = None,
) -> IterationTrace:
    """Run the variational loop from the linear schedule.

    ``space`` holds the basis indices of the final ground space used for
    fidelity; it is computed from the bundle when omitted.  A line-search
    failure ends the loop with the trace collected so far.
    """
    if space is None:
        space = ground_space(spec.bundle)
    fn = _Counted(spec, opt.h)
    trace = IterationTrace(D=spec.D)

    def record(m, x, prev_calls):
        energy, state = fn.evaluate(x)
        trace.records.append(
            IterationRecord(
                m=m,
                c=x.copy(),
                a=schedule_for(spec, x).a.copy(),
                energy=energy,
                fidelity=fidelity(spec.bundle, state, space),
                evaluations=fn.calls - prev_calls,
            )
        )

    x = initial_points(spec.S).c.copy()
    fx = fn.f(x)
    record(0, x, 0)
    if opt.iterations == 0:
        trace.status = "budget"
        return trace

    g = fn.grad(x)
    hinv = np.eye(x.size)
    old_fx = None
    for m in range(1, opt.iterations + 1):
        if np.linalg.norm(g) <= opt.gtol:
            trace.status = "converged"
            return trace
        calls_before = fn.calls
        p = -hinv @ g
        alpha, *_ = line_search(
            fn.f, fn.grad, x, p, gfk=g, old_fval=fx, old_old_fval=old_fx,
            c1=opt.c1, c2=opt.c2, maxiter=opt.max_line_search,
        )
        if alpha is None:
            log.warning("line search failed at iteration %d", m)
            trace.status = "line_search_failed"
            return trace
        x_new = x + alpha * p
        f_new = fn.f(x_new)
        g_new = fn.grad(x_new)
        step, dg = x_new - x, g_new - g
        curvature = float(dg @ step)
        if curvature > 0:
            rho = 1.0 / curvature
            eye = np.eye(x.size)
            hinv = (eye - rho * np.outer(step, dg)) @ hinv @ (eye - rho * np.outer(dg, step))
            hinv += rho * np.outer(step, step)
        old_fx, fx, x, g = fx, f_new, x_new, g_new
        record(m, x, calls_before)
        if opt.ftol > 0 and old_fx - fx < opt.ftol:
            trace.status = "converged"
            return trace
    trace.status = "budget"
    return trace
