"""Run configuration, evolution orchestration and persisted run reports.

A report holds only values that are a pure function of the configuration, so
two runs of the same config are byte-identical. The output directory is left
out of the config echo, and wall-clock timings go to a separate
``timing.json`` that the report points at.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .circuit import count_patterns, resource_bounds
from .encoding import DEFAULT_QUBIT_LIMIT, build_layout
from .errors import InvalidConfig
from .hamiltonian import build_templates, parse_term_filter
from .lattice import build_lattice, enumerate_modes
from .simulator import (evolve, fidelity, initial_components, initial_statevector, l2_distance, norm_drift,
                        occupation_rows, oracle_states, unary_probability)
from .theory import ModelParams

ORACLE_ACTIVE_LIMIT = 16
REPORT_NAME = "report.json"
TIMING_NAME = "timing.json"
OCCUPATION_NAME = "occupations.csv"
OCCUPATION_COLUMNS = ("step", "t", "mode_kappa", "occupation", "probability")

_PARAM_FIELDS = tuple(f.name for f in dataclasses.fields(ModelParams))


@dataclass(frozen=True)
class RunConfig:
    """Everything a run depends on. Field names double as JSON keys."""

    group_n: int = 2
    coupling_g: float = 1.0
    fermion_mass_m: float = 1.0
    gluon_mass_regulator: float = 1.0
    boson_cutoff: int = 1
    polarization_count: int = 2
    include_ghosts: bool = False
    dt: float = 0.1
    steps_n: int = 10
    t0: float = 0.0
    spacing: float = 1.0
    extent: int = 1
    terms: str | None = None
    oracle: bool = False
    stride: int = 1
    seed: int = 0
    shots: int = 0
    initial: str = "vacuum"
    fused: bool = True
    midpoint: bool = False
    qubit_limit: int = DEFAULT_QUBIT_LIMIT
    out: str = "run"

    def __post_init__(self):
        if self.stride < 1:
            raise InvalidConfig(f"stride must be >= 1, got {self.stride}")
        if self.shots < 0:
            raise InvalidConfig(f"shots must be >= 0, got {self.shots}")
        if self.initial not in INITIAL_STATES:
            raise InvalidConfig(f"initial state must be one of {INITIAL_STATES}, got {self.initial!r}")
        if self.terms is not None:
            parse_term_filter(self.terms)

    def model(self) -> ModelParams:
        return ModelParams(**{k: getattr(self, k) for k in _PARAM_FIELDS})

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise InvalidConfig(f"unknown config keys {unknown}")
        return cls(**data)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InvalidConfig(f"config is not valid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise InvalidConfig("config JSON must be an object")
        return cls.from_dict(data)

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)


# "quark" puts one quark in the first quark mode; "singlet" is the colour singlet pair
INITIAL_STATES = ("vacuum", "quark", "singlet")


@dataclass
class RunSetup:
    config: RunConfig
    params: ModelParams
    lattice: object
    layout: object

    @classmethod
    def from_config(cls, config: RunConfig) -> "RunSetup":
        params = config.model()
        lattice = build_lattice(config.spacing, config.extent)
        _, ordering = enumerate_modes(lattice, params)
        return cls(config, params, lattice, build_layout(ordering, params))


@dataclass
class RunReport:
    config: dict
    layout: dict
    gate_counts: dict
    norms: list
    occupations_file: str = OCCUPATION_NAME
    timing_file: str = TIMING_NAME
    summary: dict = field(default_factory=dict)
    oracle: dict | None = None
    kind: str = "evolve"

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1)


@dataclass
class RunResult:
    report: RunReport
    rows: list
    timing: dict
    trajectory: object = None


def initial_for(setup: RunSetup) -> dict:
    """Layout-basis components of the configured initial state."""
    layout = setup.layout
    if setup.config.initial == "vacuum":
        return initial_components(layout, None)
    if setup.config.initial == "quark":
        first = layout.ordering.fermion_modes[0]
        return {layout.vacuum_index() | 1 << layout.qubit_of(first): 1.0}
    from .hadronize import singlet_components

    return singlet_components(layout)


def run_evolution(config: RunConfig, initial: dict | None = None, kind: str = "evolve") -> RunResult:
    """Build, evolve and summarize one run. ``initial`` overrides ``config.initial``."""
    clock = time.perf_counter()
    setup = RunSetup.from_config(config)
    params, lattice, layout = setup.params, setup.lattice, setup.layout
    templates = build_templates(params, lattice, layout, config.terms)
    built = time.perf_counter()
    comps = initial if initial is not None else initial_for(setup)
    traj = evolve(params, lattice, layout, templates=templates, initial=comps, stride=config.stride,
                  fused=config.fused, qubit_limit=config.qubit_limit, midpoint=config.midpoint,
                  shots=config.shots or None, seed=config.seed)
    evolved = time.perf_counter()
    per_step = {tpl.label: count_patterns(tpl.xs, tpl.zs) for tpl in templates}
    gate_counts = {
        "per_step": per_step,
        "per_step_cnot": sum(c["cnot"] for c in per_step.values()),
        "per_step_single": sum(c["single"] for c in per_step.values()),
        "total_cnot": params.steps_n * sum(c["cnot"] for c in per_step.values()),
        "bounds": resource_bounds(params.group_n, lattice.volume, params.boson_cutoff),
    }
    register = traj.register
    layout_info = {
        "total_qubits": layout.total_qubits,
        "active_qubits": register.n_active,
        "fermion_modes": len(layout.fermion_qubits),
        "boson_modes": len(layout.boson_blocks),
        "cutoff": layout.cutoff,
        "terms": [tpl.label for tpl in templates],
        "strings": {tpl.label: len(tpl) for tpl in templates},
    }
    summary = {
        "norm_drift": norm_drift(traj),
        "unary_probability": unary_probability(traj.state, register),
        "final_time": params.t0 + params.steps_n * params.dt,
    }
    oracle = None
    if config.oracle:
        oracle = _oracle_check(params, templates, register, comps, traj, config)
    echo = {k: v for k, v in config.to_dict().items() if k != "out"}
    report = RunReport(config=echo, layout=layout_info, gate_counts=gate_counts,
                       norms=[float(n) for n in traj.norms], summary=summary, oracle=oracle, kind=kind)
    done = time.perf_counter()
    timing = {"build_s": built - clock, "evolve_s": evolved - built, "total_s": done - clock}
    return RunResult(report, occupation_rows(traj), timing, traj)


def _oracle_check(params, templates, register, comps, traj, config) -> dict:
    if register.n_active > ORACLE_ACTIVE_LIMIT:
        return {"status": "skipped", "reason": f"{register.n_active} active qubits above the oracle limit "
                                               f"{ORACLE_ACTIVE_LIMIT}"}
    psi0 = initial_statevector(register, comps).amplitudes
    exact = oracle_states(params, templates, register, psi0, midpoint=config.midpoint)
    got = traj.state.amplitudes
    return {"status": "compared", "l2_distance": l2_distance(got, exact), "fidelity": fidelity(got, exact)}


def write_rows(path: Path, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(OCCUPATION_COLUMNS)
        for step, t, kappa, occ, p in rows:
            writer.writerow((step, repr(float(t)), kappa, occ, repr(float(p))))


def write_artifacts(result: RunResult, out_dir) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / REPORT_NAME).write_text(result.report.to_json() + "\n")
    (out / TIMING_NAME).write_text(json.dumps(result.timing, sort_keys=True, indent=1) + "\n")
    write_rows(out / OCCUPATION_NAME, result.rows)
    return out


def occupation_series(rows, kappa: int, occupation: int = 1) -> np.ndarray:
    """Probability of ``occupation`` for mode ``kappa`` at every snapshot."""
    return np.array([p for _, _, k, occ, p in rows if k == kappa and occ == occupation])
