"""Experiment orchestration: single runs, ensembles, schedule transfer, export.

Every result table is written as plain CSV (or JSON for
manifests and summaries) with a fixed column order and floats printed by
``repr`` so re-exports are byte-identical.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from . import instances as inst
from .dynamics import EvolutionConfig, evolve
from .hamiltonian import HamiltonianBundle, build_bundle, final_energy
from .schedule import PolySchedule, fit, initial_points
from .spectrum import fidelity, ground_energy, ground_space, lowest_groups, occupations
from .variational import IterationTrace, ObjectiveSpec, OptimizerConfig, optimize

log = logging.getLogger(__name__)

WORKER_CAP_ENV = "LHZ_MAX_WORKERS"
FIDELITY_BIN_WIDTH = 0.05
IMPROVEMENT_BIN_WIDTH = 0.1
SCHEDULE_GRID = 101


@dataclass(frozen=True)
class ExperimentConfig:
    model: str = "ferro"
    N: int = 5
    J: float = 0.5
    seed: int = 0
    instances: int = 1
    T: float = 10.0
    S: int = 3
    D: int = 4
    iterations: int = 10
    dt: float | None = None
    method: str = "fast"
    workers: int = 1
    out: str | None = None
    power: int = 5
    samples: int = 101
    groups: int = 3
    track_samples: int = 21
    h: float = 1e-4

    def __post_init__(self):
        if self.model not in inst.KINDS:
            raise ValueError(f"model must be one of {inst.KINDS}")
        if self.S < 1 or self.D < 2:
            raise ValueError("need S >= 1 and D >= 2")
        if self.samples < 2:
            raise ValueError("need at least two diagnostic samples")

    @property
    def evolution(self) -> EvolutionConfig:
        return EvolutionConfig(T=self.T, dt=self.dt, method=self.method)

    @property
    def optimizer(self) -> OptimizerConfig:
        return OptimizerConfig(iterations=self.iterations, h=self.h)

    def instance(self, index: int = 0) -> inst.InstanceSpec:
        if self.model == "ferro":
            return inst.InstanceSpec("ferro", self.N, J_value=self.J)
        return inst.InstanceSpec("spinglass", self.N, seed=self.seed + index)

    def to_dict(self) -> dict:
        return asdict(self)


def effective_workers(requested: int) -> int:
    cap = os.environ.get(WORKER_CAP_ENV)
    n = max(1, int(requested))
    if cap:
        n = min(n, max(1, int(cap)))
    return n


# ---------------------------------------------------------------------------
# diagnostics along one anneal


@dataclass
class CurveTable:
    """Spectral diagnostics sampled along an anneal.

    ``energies`` holds the lowest ``groups`` distinct levels, ``probs`` the
    occupation of each degeneracy group at the same s.
    """

    name: str
    s: np.ndarray
    energies: np.ndarray
    probs: np.ndarray

    @property
    def gap(self) -> np.ndarray:
        return self.energies[:, 1] - self.energies[:, 0]

    @property
    def min_gap(self) -> tuple[float, float]:
        i = int(np.argmin(self.gap))
        return float(self.s[i]), float(self.gap[i])

    @property
    def ground_probability(self) -> np.ndarray:
        return self.probs[:, 0]


def schedule_diagnostics(
    bundle: HamiltonianBundle,
    sched: PolySchedule,
    evolution: EvolutionConfig,
    samples: int = 101,
    groups: int = 3,
    name: str = "",
) -> CurveTable:
    """Gap and group occupations of the evolving state at ``samples`` points."""
    groups = max(groups, 2)
    times = tuple(np.linspace(0.0, 1.0, samples))
    res = evolve(bundle, sched, replace(evolution, record_times=times))
    energies = np.empty((samples, groups))
    probs = np.empty((samples, groups))
    for i, (s, state) in enumerate(res.snapshots):
        sl = lowest_groups(bundle, s, sched(s), groups)
        energies[i] = sl.group_energies
        probs[i] = occupations(sl, state)
    return CurveTable(name, np.array([s for s, _ in res.snapshots]), energies, probs)


def ground_track(
    bundle: HamiltonianBundle, sched: PolySchedule, evolution: EvolutionConfig, samples: int
) -> tuple[np.ndarray, np.ndarray]:
    """Instantaneous ground-space fidelity along the anneal."""
    times = tuple(np.linspace(0.0, 1.0, samples))
    res = evolve(bundle, sched, replace(evolution, record_times=times))
    s = np.array([t for t, _ in res.snapshots])
    p = np.array([occupations(lowest_groups(bundle, t, sched(t), 1), v)[0] for t, v in res.snapshots])
    return s, p


# ---------------------------------------------------------------------------
# single instance


@dataclass
class SingleResult:
    spec: inst.InstanceSpec
    trace: IterationTrace
    curves: dict[str, CurveTable] = field(default_factory=dict)
    ground_energy: float = 0.0

    @property
    def optimized(self) -> PolySchedule | None:
        if len(self.trace.records) < 2:
            return None
        return self.trace.final_schedule


def comparison_schedules(result_trace: IterationTrace, power: int) -> dict[str, PolySchedule]:
    scheds = {"linear": PolySchedule.linear(), f"power{power}": PolySchedule.power(power)}
    if len(result_trace.records) > 1:
        scheds = {"optimized": result_trace.final_schedule, **scheds}
    return scheds


def run_single(config: ExperimentConfig, diagnostics: bool = True) -> SingleResult:
    spec = config.instance(0)
    problem = inst.generate(spec)
    bundle = build_bundle(problem)
    space = ground_space(bundle)
    trace = optimize(ObjectiveSpec(bundle, config.S, config.D, config.evolution), config.optimizer, space)
    result = SingleResult(spec, trace, ground_energy=ground_energy(bundle))
    if diagnostics:
        for name, sched in comparison_schedules(trace, config.power).items():
            result.curves[name] = schedule_diagnostics(
                bundle, sched, config.evolution, config.samples, config.groups, name
            )
    if config.out:
        export_single(result, problem, config, Path(config.out))
    return result


# ---------------------------------------------------------------------------
# ensembles


@dataclass
class BatchRecord:
    id: str
    seed: int | None
    fidelity_linear: float = math.nan
    fidelity_optimized: float = math.nan
    improvement: float = math.nan
    upper_bound: float = math.nan
    energy_linear: float = math.nan
    energy_optimized: float = math.nan
    ground_energy: float = math.nan
    c: list[float] = field(default_factory=list)
    a: list[float] = field(default_factory=list)
    evaluations: int = 0
    status: str = ""
    error: str | None = None
    track_s: list[float] = field(default_factory=list)
    track_p: list[float] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.error is None

    @property
    def schedule(self) -> PolySchedule:
        return PolySchedule(np.array(self.a))


def improvement(f_opt: float, f_lin: float) -> tuple[float, float]:
    """Relative fidelity gain and its ceiling (1 - F_lin) / F_lin."""
    return (f_opt - f_lin) / f_lin, (1.0 - f_lin) / f_lin


def run_instance(spec: inst.InstanceSpec, config: ExperimentConfig) -> BatchRecord:
    record = BatchRecord(id=spec.id, seed=spec.seed)
    try:
        bundle = build_bundle(inst.generate(spec))
        space = ground_space(bundle)
        trace = optimize(
            ObjectiveSpec(bundle, config.S, config.D, config.evolution), config.optimizer, space
        )
        first, last = trace.records[0], trace.records[-1]
        record.fidelity_linear = first.fidelity
        record.fidelity_optimized = last.fidelity
        record.improvement, record.upper_bound = improvement(last.fidelity, first.fidelity)
        record.energy_linear = first.energy
        record.energy_optimized = last.energy
        record.ground_energy = ground_energy(bundle)
        record.c = [float(x) for x in last.c]
        record.a = [float(x) for x in last.a]
        record.evaluations = trace.total_evaluations
        record.status = trace.status
        if config.track_samples >= 2:
            s, p = ground_track(bundle, trace.final_schedule, config.evolution, config.track_samples)
            record.track_s = [float(x) for x in s]
            record.track_p = [float(x) for x in p]
    except Exception as exc:  # recorded per instance; the batch continues
        log.exception("instance %s failed", spec.id)
        record.error = f"{type(exc).__name__}: {exc}"
    return record


def _run_instance_task(args):
    return run_instance(*args)


@dataclass
class BatchResult:
    config: ExperimentConfig
    records: list[BatchRecord]

    @property
    def ok_records(self) -> list[BatchRecord]:
        return [r for r in self.records if r.ok]

    @property
    def failed(self) -> int:
        return sum(not r.ok for r in self.records)

    def summary(self) -> dict:
        return summarize(self.records)


def fidelity_histogram(values) -> tuple[np.ndarray, np.ndarray]:
    edges = np.linspace(0.0, 1.0, int(round(1 / FIDELITY_BIN_WIDTH)) + 1)
    counts, _ = np.histogram(np.clip(values, 0.0, 1.0), bins=edges)
    return edges, counts


def improvement_histogram(values) -> tuple[np.ndarray, np.ndarray]:
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return np.array([0.0, IMPROVEMENT_BIN_WIDTH]), np.zeros(1, dtype=int)
    w = IMPROVEMENT_BIN_WIDTH
    lo = math.floor(values.min() / w) * w
    nbins = max(1, math.ceil((values.max() - lo) / w + 1e-12))
    edges = lo + w * np.arange(nbins + 1)
    counts, _ = np.histogram(values, bins=edges)
    return edges, counts


def mass_above(values, threshold: float = 0.8) -> float:
    values = np.asarray(values, dtype=float)
    return float(np.mean(values > threshold)) if values.size else math.nan


def summarize(records: list[BatchRecord]) -> dict:
    ok = [r for r in records if r.ok]
    f_lin = np.array([r.fidelity_linear for r in ok])
    f_opt = np.array([r.fidelity_optimized for r in ok])
    imp = np.array([r.improvement for r in ok])
    out = {
        "count": len(records),
        "failed": len(records) - len(ok),
        "median_fidelity_linear": float(np.median(f_lin)) if ok else math.nan,
        "median_fidelity_optimized": float(np.median(f_opt)) if ok else math.nan,
        "median_improvement": float(np.median(imp)) if ok else math.nan,
        "fraction_linear_in_0.1_0.6": float(np.mean((f_lin >= 0.1) & (f_lin <= 0.6))) if ok else math.nan,
        "max_fidelity_linear": float(f_lin.max()) if ok else math.nan,
        "mass_above_0.8_linear": mass_above(f_lin),
        "mass_above_0.8_optimized": mass_above(f_opt),
        "bound_violations": int(np.sum(imp > np.array([r.upper_bound for r in ok]))),
    }
    return out


def run_batch(config: ExperimentConfig, count: int | None = None) -> BatchResult:
    """Optimise ``count`` instances; records come back in instance order."""
    count = config.instances if count is None else count
    if count < 1:
        raise ValueError("batch needs at least one instance")
    specs = [config.instance(i) for i in range(count)]
    workers = effective_workers(config.workers)
    tasks = [(spec, config) for spec in specs]
    if workers == 1:
        records = [_run_instance_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_run_instance_task, tasks))
    result = BatchResult(config, records)
    if config.out:
        export_batch(result, Path(config.out))
    return result


# ---------------------------------------------------------------------------
# schedule transfer


@dataclass
class TransferRow:
    id: str
    fidelity_linear: float
    fidelity_transfer: float

    @property
    def improvement(self) -> float:
        return (self.fidelity_transfer - self.fidelity_linear) / self.fidelity_linear


def evaluate_schedule(bundle: HamiltonianBundle, sched: PolySchedule, evolution: EvolutionConfig):
    """(final energy, final ground-space fidelity) of one anneal."""
    state = evolve(bundle, sched, evolution).final_state
    return final_energy(bundle, state), fidelity(bundle, state)


def transfer_experiment(
    donor: inst.InstanceSpec | PolySchedule,
    recipients: list[inst.InstanceSpec],
    config: ExperimentConfig,
) -> tuple[PolySchedule, list[TransferRow]]:
    """Apply a donor's optimised schedule, unchanged, to other instances.

    ``donor`` is either an instance (optimised here first) or an already
    optimised schedule.
    """
    if isinstance(donor, PolySchedule):
        sched = donor
    else:
        bundle = build_bundle(inst.generate(donor))
        trace = optimize(ObjectiveSpec(bundle, config.S, config.D, config.evolution), config.optimizer)
        sched = trace.final_schedule
    linear = fit(initial_points(config.S), config.D)
    rows = []
    for spec in recipients:
        bundle = build_bundle(inst.generate(spec))
        _, f_lin = evaluate_schedule(bundle, linear, config.evolution)
        _, f_tr = evaluate_schedule(bundle, sched, config.evolution)
        rows.append(TransferRow(spec.id, f_lin, f_tr))
    if config.out:
        export_transfer(sched, rows, Path(config.out))
    return sched, rows


# ---------------------------------------------------------------------------
# export


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def write_csv(path: Path, header: list[str], rows) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([_fmt(x) for x in row])
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path


def write_json(path: Path, data) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    try:
        path.write_text(json.dumps(data, indent=1, sort_keys=True) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path


def write_trace(path: Path, trace: IterationTrace) -> Path:
    S = len(trace.records[0].c)
    D = max(len(r.a) for r in trace.records)
    header = ["m", *[f"c_{n}" for n in range(1, S + 1)], *[f"a_{d}" for d in range(1, D + 1)],
              "energy", "fidelity", "evaluations"]
    rows = []
    for r in trace.records:
        a = list(r.a) + [0.0] * (D - len(r.a))
        rows.append([r.m, *r.c, *a, r.energy, r.fidelity, r.evaluations])
    return write_csv(path, header, rows)


def write_curves(path: Path, table: CurveTable) -> Path:
    m = table.energies.shape[1]
    g = table.probs.shape[1]
    header = ["s", *[f"E_{i}" for i in range(m)], "gap", *[f"p_{i}" for i in range(g)]]
    rows = [
        [s, *table.energies[i], table.gap[i], *table.probs[i]] for i, s in enumerate(table.s)
    ]
    return write_csv(path, header, rows)


def write_histogram(path: Path, edges: np.ndarray, counts: np.ndarray) -> Path:
    rows = [[edges[i], edges[i + 1], int(counts[i])] for i in range(len(counts))]
    return write_csv(path, ["bin_lo", "bin_hi", "count"], rows)


def write_scatter(path: Path, records: list[BatchRecord]) -> Path:
    rows = [
        [r.id, r.fidelity_linear, r.fidelity_optimized, r.improvement, r.upper_bound]
        for r in records if r.ok
    ]
    return write_csv(path, ["id", "F_lin", "F_opt", "improvement", "upper_bound"], rows)


def write_schedules(path: Path, records: list[BatchRecord], grid: int = SCHEDULE_GRID) -> Path:
    s = np.linspace(0.0, 1.0, grid)
    header = ["id", *[f"C({x:.2f})" for x in s]]
    rows = [[r.id, *r.schedule(s)] for r in records if r.ok]
    return write_csv(path, header, rows)


def write_ground_track(path: Path, records: list[BatchRecord]) -> Path:
    ok = [r for r in records if r.ok and r.track_s]
    if not ok:
        return write_csv(path, ["id"], [])
    header = ["id", *[f"p0({x:.2f})" for x in ok[0].track_s]]
    return write_csv(path, header, [[r.id, *r.track_p] for r in ok])


def export_single(result: SingleResult, problem, config: ExperimentConfig, out: Path) -> list[Path]:
    out.mkdir(parents=True, exist_ok=True)
    paths = [
        write_json(out / "config.json", config.to_dict()),
        write_json(out / "layout.json", problem.layout.to_dict()),
        write_json(out / "instance.json", inst.to_dict(result.spec, problem)),
        write_trace(out / "trace.csv", result.trace),
        write_json(out / "trace.json", result.trace.to_dict()),
    ]
    for name, table in result.curves.items():
        paths.append(write_curves(out / f"curves_{name}.csv", table))
    return paths


def export_batch(result: BatchResult, out: Path) -> list[Path]:
    out.mkdir(parents=True, exist_ok=True)
    records = result.records
    ok = result.ok_records
    e_lin, c_lin = fidelity_histogram([r.fidelity_linear for r in ok])
    e_opt, c_opt = fidelity_histogram([r.fidelity_optimized for r in ok])
    e_imp, c_imp = improvement_histogram([r.improvement for r in ok])
    specs = [result.config.instance(i) for i in range(len(records))]
    return [
        write_json(out / "config.json", result.config.to_dict()),
        write_json(out / "manifest.json", inst.manifest(specs)),
        write_json(out / "records.json", [asdict(r) for r in records]),
        write_json(out / "summary.json", result.summary()),
        write_scatter(out / "scatter.csv", records),
        write_histogram(out / "hist_fidelity_linear.csv", e_lin, c_lin),
        write_histogram(out / "hist_fidelity_optimized.csv", e_opt, c_opt),
        write_histogram(out / "hist_improvement.csv", e_imp, c_imp),
        write_schedules(out / "schedules.csv", records),
        write_ground_track(out / "ground_track.csv", records),
    ]


def export_transfer(sched: PolySchedule, rows: list[TransferRow], out: Path) -> list[Path]:
    out.mkdir(parents=True, exist_ok=True)
    return [
        write_json(out / "donor_schedule.json", sched.to_dict()),
        write_csv(
            out / "transfer.csv",
            ["id", "F_lin", "F_transfer", "improvement"],
            [[r.id, r.fidelity_linear, r.fidelity_transfer, r.improvement] for r in rows],
        ),
    ]
