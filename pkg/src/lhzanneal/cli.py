"""Command-line entry point.

    lhzanneal single    --model ferro --j 0.5 --t-anneal 10 --out runs/ferro
    lhzanneal batch     --model spinglass --instances 100 --t-anneal 20 --out runs/sg
    lhzanneal transfer  --instances 100 --donor-seed 7 --out runs/transfer
    lhzanneal spectrum  --model ferro --coeffs 7.8,-28.6,35.1,-13.3 --out runs/gaps

A JSON config file (``--config``) may supply any option; explicit flags win.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import fields
from pathlib import Path

import numpy as np

from . import instances as inst
from .experiments import (
    ExperimentConfig,
    run_batch,
    run_single,
    schedule_diagnostics,
    transfer_experiment,
    write_curves,
)
from .hamiltonian import build_bundle
from .schedule import PolySchedule

LONG_MODE_INSTANCES = 1000
DEFAULT_T = {"ferro": 10.0, "spinglass": 20.0}

# flag name -> ExperimentConfig field
FLAG_FIELDS = {
    "n": "N",
    "model": "model",
    "j": "J",
    "seed": "seed",
    "instances": "instances",
    "t_anneal": "T",
    "s_points": "S",
    "d_degree": "D",
    "iters": "iterations",
    "dt": "dt",
    "method": "method",
    "workers": "workers",
    "out": "out",
    "power": "power",
    "samples": "samples",
}


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", type=Path, help="JSON file with default options")
    p.add_argument("--n", type=int, help="logical spin count N (K = N(N-1)/2 qubits)")
    p.add_argument("--model", choices=inst.KINDS)
    p.add_argument("--j", type=float, help="ferromagnetic local field J_k")
    p.add_argument("--seed", type=int, help="spin-glass base seed; instance i uses seed + i")
    p.add_argument("--instances", type=int)
    p.add_argument("--t-anneal", type=float, help="anneal time T (default 10 ferro, 20 spin glass)")
    p.add_argument("--s-points", type=int, help="interior schedule points S")
    p.add_argument("--d-degree", type=int, help="polynomial degree D")
    p.add_argument("--iters", type=int, help="BFGS iterations")
    p.add_argument("--dt", type=float, help="integration step")
    p.add_argument("--method", choices=("fast", "reference"))
    p.add_argument("--workers", type=int)
    p.add_argument("--out", type=str, help="output directory")
    p.add_argument("--power", type=int, help="exponent of the comparison schedule s**p")
    p.add_argument("--samples", type=int, help="points on the diagnostic s grid")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lhzanneal", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    _common(sub.add_parser("single", help="optimise one instance and write diagnostics"))
    p = sub.add_parser("batch", help="optimise an ensemble of instances")
    _common(p)
    p.add_argument("--long", action="store_true", help=f"run {LONG_MODE_INSTANCES} instances")
    p = sub.add_parser("transfer", help="apply one optimised schedule to other instances")
    _common(p)
    p.add_argument("--donor-seed", type=int, help="seed of the donor instance (default: --seed)")
    p = sub.add_parser("spectrum", help="gap and occupation curves for fixed schedules")
    _common(p)
    p.add_argument("--coeffs", type=str, help="comma-separated a_1..a_D of an extra schedule")
    return parser


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    values: dict = {}
    if args.config is not None:
        loaded = json.loads(Path(args.config).read_text())
        known = {f.name for f in fields(ExperimentConfig)}
        reverse = {flag.replace("_", "-"): name for flag, name in FLAG_FIELDS.items()}
        for key, val in loaded.items():
            name = key if key in known else reverse.get(key, FLAG_FIELDS.get(key))
            if name is None:
                raise SystemExit(f"unknown config key {key!r} in {args.config}")
            values[name] = val
    for flag, name in FLAG_FIELDS.items():
        val = getattr(args, flag, None)
        if val is not None:
            values[name] = val
    if getattr(args, "long", False):
        values["instances"] = LONG_MODE_INSTANCES
    model = values.get("model", "ferro")
    values.setdefault("T", DEFAULT_T[model])
    return ExperimentConfig(**values)


def _print_trace(trace):
    for r in trace.records:
        print(f"m={r.m:2d}  E={r.energy:+.6f}  F={r.fidelity:.6f}  evals={r.evaluations}")
    print(f"status: {trace.status}")


def cmd_single(config: ExperimentConfig) -> int:
    result = run_single(config)
    _print_trace(result.trace)
    for name, table in result.curves.items():
        s, gap = table.min_gap
        print(f"{name:>10}: min gap {gap:.6f} at s={s:.3f}, final p0={table.ground_probability[-1]:.6f}")
    return 0


def cmd_batch(config: ExperimentConfig) -> int:
    result = run_batch(config)
    print(json.dumps(result.summary(), indent=1, sort_keys=True))
    return 1 if result.failed else 0


def cmd_transfer(config: ExperimentConfig, donor_seed: int | None) -> int:
    if config.model != "spinglass":
        raise SystemExit("transfer needs --model spinglass")
    donor = inst.InstanceSpec("spinglass", config.N, seed=config.seed if donor_seed is None else donor_seed)
    recipients = [config.instance(i) for i in range(config.instances)]
    sched, rows = transfer_experiment(donor, recipients, config)
    print("donor schedule a =", [float(x) for x in sched.a])
    if rows:
        f_lin = np.median([r.fidelity_linear for r in rows])
        f_tr = np.median([r.fidelity_transfer for r in rows])
        print(f"median F linear {f_lin:.6f}  median F transferred {f_tr:.6f}")
    return 0


def cmd_spectrum(config: ExperimentConfig, coeffs: str | None) -> int:
    spec = config.instance(0)
    problem = inst.generate(spec)
    bundle = build_bundle(problem)
    scheds = {"linear": PolySchedule.linear(), f"power{config.power}": PolySchedule.power(config.power)}
    if coeffs:
        scheds["custom"] = PolySchedule(np.array([float(x) for x in coeffs.split(",")]))
    out = Path(config.out) if config.out else None
    for name, sched in scheds.items():
        table = schedule_diagnostics(bundle, sched, config.evolution, config.samples, 3, name)
        s, gap = table.min_gap
        print(f"{name:>10}: min gap {gap:.6f} at s={s:.3f}, final p0={table.ground_probability[-1]:.6f}")
        if out:
            write_curves(out / f"curves_{name}.csv", table)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    config = resolve_config(args)
    if args.command == "single":
        return cmd_single(config)
    if args.command == "batch":
        return cmd_batch(config)
    if args.command == "transfer":
        return cmd_transfer(config, args.donor_seed)
    return cmd_spectrum(config, args.coeffs)


if __name__ == "__main__":
    sys.exit(main())
