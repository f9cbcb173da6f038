"""Problem instances: the uniform ferromagnet and seeded spin glasses.

Spin-glass couplings come from a counter-based generator (Philox keyed by
``(seed, k)``), so coupling k of an instance never depends on how many
other values were drawn before it.  Uniform doubles are built from the
raw 64-bit output directly rather than through ``Generator`` methods,
keeping streams fixed across numpy versions.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .hamiltonian import PhysicalProblem
from .lattice import LhzLayout, build_layout

FORMAT = "lhzanneal-instance"
FORMAT_VERSION = 1
KINDS = ("ferro", "spinglass")
SPINGLASS_HALF_WIDTH = 0.5


class InstanceFormatError(ValueError):
    """Malformed or unsupported instance file."""


@dataclass(frozen=True)
class InstanceSpec:
    kind: str
    N: int
    J_value: float | None = None
    seed: int | None = None
    id: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.kind == "ferro" and self.J_value is None:
            raise ValueError("ferro instances need J_value")
        if self.kind == "spinglass" and self.seed is None:
            raise ValueError("spinglass instances need a seed")
        if self.id is None:
            ident = (
                f"ferro-N{self.N}-J{self.J_value!r}"
                if self.kind == "ferro"
                else f"spinglass-N{self.N}-seed{self.seed}"
            )
            object.__setattr__(self, "id", ident)


def _uniform01(seed: int, k: int, draw: int = 0) -> float:
    key = np.array([seed % 2**64, k], dtype=np.uint64)
    bits = np.random.Philox(key=key, counter=[draw, 0, 0, 0]).random_raw()
    return float(int(bits) >> 11) * 2.0**-53


def spinglass_coupling(seed: int, k: int) -> float:
    """Coupling k of instance ``seed``, uniform on the open interval (-0.5, 0.5)."""
    draw = 0
    while True:
        u = _uniform01(seed, k, draw)
        if u > 0.0:
            return (u - 0.5) * (2 * SPINGLASS_HALF_WIDTH)
        draw += 1


def generate(spec: InstanceSpec, layout: LhzLayout | None = None) -> PhysicalProblem:
    layout = layout or build_layout(spec.N)
    if spec.kind == "ferro":
        J = np.full(layout.K, float(spec.J_value))
    else:
        J = np.array([spinglass_coupling(spec.seed, k) for k in range(layout.K)])
    return PhysicalProblem(layout, J)


def ensemble(base_seed: int, count: int, N: int = 5) -> list[InstanceSpec]:
    """Spin-glass instances with seeds base_seed, base_seed + 1, ..."""
    return [InstanceSpec("spinglass", N, seed=base_seed + i) for i in range(count)]


def checksum(problem: PhysicalProblem) -> str:
    return hashlib.sha256(np.ascontiguousarray(problem.J, dtype="<f8").tobytes()).hexdigest()


def to_dict(spec: InstanceSpec, problem: PhysicalProblem) -> dict:
    return {
        "format": FORMAT,
        "version": FORMAT_VERSION,
        "id": spec.id,
        "kind": spec.kind,
        "N": spec.N,
        "seed": spec.seed,
        "J_value": spec.J_value,
        "J": [
            {"k": k, "pair": list(pair), "value": float(v).hex()}
            for k, (pair, v) in enumerate(zip(problem.layout.pairs, problem.J))
        ],
        "sha256": checksum(problem),
    }


def save(spec: InstanceSpec, problem: PhysicalProblem, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(to_dict(spec, problem), indent=1) + "\n")
    return path


def _field(data, name, where):
    if name not in data:
        raise InstanceFormatError(f"{where}: missing field {name!r}")
    return data[name]


def from_dict(data: dict, where: str = "<instance>") -> tuple[InstanceSpec, PhysicalProblem]:
    if _field(data, "format", where) != FORMAT:
        raise InstanceFormatError(f"{where}: not an instance file (format={data['format']!r})")
    version = _field(data, "version", where)
    if version != FORMAT_VERSION:
        raise InstanceFormatError(
            f"{where}: unsupported instance version {version!r} (expected {FORMAT_VERSION})"
        )
    try:
        spec = InstanceSpec(
            kind=_field(data, "kind", where),
            N=int(_field(data, "N", where)),
            J_value=data.get("J_value"),
            seed=data.get("seed"),
            id=data.get("id"),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, InstanceFormatError):
            raise
        raise InstanceFormatError(f"{where}: {exc}") from exc
    layout = build_layout(spec.N)
    entries = _field(data, "J", where)
    by_index = {}
    for pos, entry in enumerate(entries):
        try:
            k = int(entry["k"])
            by_index[k] = float.fromhex(entry["value"])
        except (KeyError, TypeError, ValueError) as exc:
            raise InstanceFormatError(f"{where}: bad J entry at position {pos}: {exc}") from exc
    for k in range(layout.K):
        if k not in by_index:
            raise InstanceFormatError(f"{where}: missing J entry for index k={k}")
    extra = sorted(set(by_index) - set(range(layout.K)))
    if extra:
        raise InstanceFormatError(f"{where}: J index {extra[0]} out of range 0..{layout.K - 1}")
    J = np.array([by_index[k] for k in range(layout.K)])
    return spec, PhysicalProblem(layout, J)


def load(path) -> tuple[InstanceSpec, PhysicalProblem]:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"{path}:{exc.lineno}: {exc.msg}") from exc
    return from_dict(data, where=str(path))


def manifest(specs: list[InstanceSpec]) -> list[dict]:
    """(id, seed, checksum) rows for an ensemble."""
    rows = []
    for spec in specs:
        rows.append({"id": spec.id, "seed": spec.seed, "sha256": checksum(generate(spec))})
    return rows
