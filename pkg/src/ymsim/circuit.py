"""Gate synthesis of Pauli exponentials, Trotter scheduling and gate counting.

Each exp(-i theta P) is lowered to the auxiliary-qubit pattern: basis change
(H for X, R for Y), a CNOT from every qubit of P onto the auxiliary, RZ(2 theta)
on the auxiliary, then the CNOTs and basis changes undone. The auxiliary is
the highest qubit index and starts in |0>; the circuit realizes
exp(-i theta P (x) Z_aux), which is exp(-i theta P) on that subspace.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CapacityError, InvalidParameter
from .pauli import ORACLE_QUBIT_LIMIT, PauliString, PauliSum, _letters

GATE_KINDS = ("H", "R", "RDG", "CNOT", "RZ", "X", "Z")

_SQ2 = 1.0 / math.sqrt(2.0)
FIXED_MATRICES = {
    "H": np.array([[1, 1], [1, -1]], dtype=complex) * _SQ2,
    "R": np.array([[1, -1j], [-1j, 1]], dtype=complex) * _SQ2,
    "RDG": np.array([[1, 1j], [1j, 1]], dtype=complex) * _SQ2,
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def rz_matrix(angle: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * angle), np.exp(0.5j * angle)])


@dataclass(frozen=True)
class Gate:
    kind: str
    targets: tuple[int, ...]
    angle: float | None = None

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise InvalidParameter(f"unknown gate kind {self.kind!r}")
        want = 2 if self.kind == "CNOT" else 1
        if len(self.targets) != want or any(q < 0 for q in self.targets):
            raise InvalidParameter(f"{self.kind} needs {want} non-negative qubit indices")
        if self.kind == "CNOT" and self.targets[0] == self.targets[1]:
            raise InvalidParameter("CNOT control and target must differ")
        if self.kind == "RZ" and (self.angle is None or not math.isfinite(self.angle)):
            raise InvalidParameter("RZ needs a finite angle")

    def matrix(self) -> np.ndarray:
        if self.kind == "RZ":
            return rz_matrix(self.angle)
        return FIXED_MATRICES[self.kind]

    def to_text(self) -> str:
        body = " ".join(str(q) for q in self.targets)
        if self.kind == "RZ":
            return f"RZ {body} {self.angle!r}"
        return f"{self.kind} {body}"

    @classmethod
    def from_text(cls, line: str) -> "Gate":
        parts = line.split()
        kind = parts[0].upper()
        if kind == "RZ":
            return cls("RZ", (int(parts[1]),), float(parts[2]))
        return cls(kind, tuple(int(p) for p in parts[1:]))

    def remap(self, mapping) -> "Gate":
        return Gate(self.kind, tuple(mapping[q] for q in self.targets), self.angle)


@dataclass(frozen=True)
class RotationBlock:
    """Gates [start, stop) of a program implement exp(-i theta P) for the pattern (x, z)."""

    start: int
    stop: int
    x: int
    z: int
    theta: float
    label: str = ""


@dataclass
class GateProgram:
    gates: list = field(default_factory=list)
    qubit_count: int = 1
    metadata: dict = field(default_factory=dict)
    blocks: list = field(default_factory=list)

    @property
    def aux_qubit(self) -> int:
        return self.qubit_count - 1

    def __len__(self) -> int:
        return len(self.gates)

    def extend(self, other: "GateProgram") -> None:
        if other.qubit_count != self.qubit_count:
            raise InvalidParameter("cannot concatenate programs on different registers")
        offset = len(self.gates)
        self.gates.extend(other.gates)
        self.blocks.extend(RotationBlock(b.start + offset, b.stop + offset, b.x, b.z, b.theta, b.label)
                           for b in other.blocks)
        self.metadata["global_phase"] = self.metadata.get("global_phase", 0.0) + other.metadata.get("global_phase", 0.0)
        labels = self.metadata.setdefault("labels", [])
        for lab in other.metadata.get("labels", []):
            if lab not in labels:
                labels.append(lab)

    def to_text(self) -> str:
        return "".join(g.to_text() + "\n" for g in self.gates)

    def adjoint(self) -> "GateProgram":
        inverse = {"R": "RDG", "RDG": "R"}
        gates = []
        for g in reversed(self.gates):
            if g.kind == "RZ":
                gates.append(Gate("RZ", g.targets, -g.angle))
            else:
                gates.append(Gate(inverse.get(g.kind, g.kind), g.targets))
        return GateProgram(gates, self.qubit_count, {"adjoint_of": self.metadata.get("labels", [])})

    def counts(self) -> dict:
        cnot = sum(1 for g in self.gates if g.kind == "CNOT")
        return {"cnot": cnot, "single": len(self.gates) - cnot}

    def dense_matrix(self, limit: int = ORACLE_QUBIT_LIMIT) -> np.ndarray:
        n = self.qubit_count
        if n > limit:
            raise CapacityError(f"dense program matrix on {n} qubits exceeds the oracle limit {limit}")
        dim = 1 << n
        u = np.eye(dim, dtype=complex)
        idx = np.arange(dim)
        for g in self.gates:
            if g.kind == "CNOT":
                c, t = g.targets
                rows = np.where((idx >> c) & 1, idx ^ (1 << t), idx)
                u = u[rows]
            else:
                q = g.targets[0]
                m = g.matrix()
                bit = (idx >> q) & 1
                partner = idx ^ (1 << q)
                u = m[bit, bit][:, None] * u + m[bit, 1 - bit][:, None] * u[partner]
        return u


def synthesize_pauli_exponential(term: PauliString, theta: float, n_qubits: int,
                                 aux: int | None = None, label: str = "") -> GateProgram:
    """Program for exp(-i theta P) on ``n_qubits`` working qubits plus one auxiliary.

    ``term`` supplies the letter pattern; its coefficient is ignored (theta
    already carries it). The identity pattern emits no gates and records
    -theta as a global phase.
    """
    if not math.isfinite(theta):
        raise InvalidParameter("rotation angle must be finite")
    aux = n_qubits if aux is None else aux
    prog = GateProgram(qubit_count=max(n_qubits, aux) + 1, metadata={"labels": [label] if label else [],
                                                                       "global_phase": 0.0})
    letters = _letters(term.x, term.z)
    if any(q >= n_qubits or q == aux for q in letters):
        raise InvalidParameter("Pauli pattern reaches outside the working register")
    if not letters:
        prog.metadata["global_phase"] = -theta
        return prog
    qubits = sorted(letters)
    pre = [Gate("H" if letters[q] == "X" else "R", (q,)) for q in qubits if letters[q] != "Z"]
    post = [Gate("H" if letters[q] == "X" else "RDG", (q,)) for q in qubits if letters[q] != "Z"]
    ladder = [Gate("CNOT", (q, aux)) for q in qubits]
    gates = pre + ladder + [Gate("RZ", (aux,), 2.0 * theta)] + ladder[::-1] + post
    prog.gates = gates
    prog.blocks = [RotationBlock(0, len(gates), term.x, term.z, theta, label)]
    return prog


def _strings_of(term) -> tuple[str, PauliSum]:
    # accepts a HamiltonianTerm or a (label, PauliSum) pair
    if hasattr(term, "pauli"):
        return term.label, term.pauli
    label, ps = term
    return label, ps


def factor_program(label: str, pauli: PauliSum, dt: float, n_qubits: int) -> GateProgram:
    """exp(-i H dt) ~ product of per-string exponentials, strings in sorted pattern order.

    The first string in sorted order is applied first.
    """
    prog = GateProgram(qubit_count=n_qubits + 1, metadata={"labels": [label], "global_phase": 0.0})
    for s in pauli.sorted_strings():
        if s.coeff.imag != 0:
            raise InvalidParameter(f"non-Hermitian coefficient {s.coeff} in {label}")
        prog.extend(synthesize_pauli_exponential(s, s.coeff.real * dt, n_qubits, label=label))
    return prog


def trotter_step(terms, dt: float, n_qubits: int) -> GateProgram:
    """One slice exp(-i H_1 dt) ... exp(-i H_m dt) for terms listed as [H_1, ..., H_m].

    The matrix of the returned program is the product with H_1 leftmost, so the
    gates of the last listed term come first.
    """
    prog = GateProgram(qubit_count=n_qubits + 1, metadata={"labels": [], "global_phase": 0.0})
    for term in reversed(list(terms)):
        label, ps = _strings_of(term)
        prog.extend(factor_program(label, ps, dt, n_qubits))
    return prog


def step_times(params, midpoint: bool = False) -> list[float]:
    shift = 0.5 if midpoint else 0.0
    return [params.t0 + (k + shift) * params.dt for k in range(params.steps_n)]


def schedule_evolution(params, lattice, layout, terms=None, midpoint: bool = False,
                       templates=None) -> list[GateProgram]:
    """One Trotter-step program per slice; slice k uses H_I(t0 + k dt)."""
    from .hamiltonian import build_templates

    templates = templates if templates is not None else build_templates(params, lattice, layout, terms)
    programs = []
    for k, t in enumerate(step_times(params, midpoint)):
        step = trotter_step([(tpl.label, tpl.at(t)) for tpl in templates], params.dt, layout.total_qubits)
        step.metadata.update({"step": k, "time": t})
        programs.append(step)
    return programs


# ---------------------------------------------------------------------------
# gate counting


def bound_i1(n: int, volume: int, cutoff: int) -> int:
    return 512 * (2 + volume * n) * (n * n - 1) * n * n * (cutoff + 1)


def bound_h_fi(n: int, volume: int, cutoff: int) -> int:
    return 64 * volume * ((1 + n) ** 2 * (volume**2 - 3) + 64 * volume) * n * n * (n * n - 1) * (cutoff + 1)


def bound_i2(cutoff: int) -> int:
    return 65536 * (cutoff + 1) ** 4


def bound_h_g4i(n: int, volume: int, cutoff: int) -> int:
    return 655360 * (n * n - 1) ** 5 * volume**3 * (cutoff + 1) ** 4


def resource_bounds(n: int, volume: int, cutoff: int) -> dict:
    return {"I1": bound_i1(n, volume, cutoff), "H_FI": bound_h_fi(n, volume, cutoff),
            "I2": bound_i2(cutoff), "H_G4I": bound_h_g4i(n, volume, cutoff)}


def pattern_gate_counts(x: int, z: int) -> tuple[int, int]:
    """(CNOT, single-qubit) gates the synthesis emits for one pattern."""
    weight = (x | z).bit_count()
    if not weight:
        return 0, 0
    return 2 * weight, 2 * x.bit_count() + 1


def count_patterns(xs, zs) -> dict:
    cnot = single = 0
    for x, z in zip(xs, zs):
        c, s = pattern_gate_counts(x, z)
        cnot += c
        single += s
    return {"cnot": cnot, "single": single, "strings": len(xs)}


@dataclass
class GateCountReport:
    cnot_count: int = 0
    single_qubit_count: int = 0
    per_term: dict = field(default_factory=dict)
    bounds: dict = field(default_factory=dict)
    measured_vs_bound: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"cnot_count": self.cnot_count, "single_qubit_count": self.single_qubit_count,
                "per_term": self.per_term, "bounds": self.bounds,
                "measured_vs_bound": self.measured_vs_bound}

    def within_bounds(self) -> bool:
        return all(v["measured"] <= v["bound"] for v in self.measured_vs_bound.values())


def count_gates(programs) -> GateCountReport:
    """Exact recount of emitted programs, with a per-label breakdown."""
    report = GateCountReport()
    for prog in programs:
        for b in prog.blocks:
            c, s = pattern_gate_counts(b.x, b.z)
            slot = report.per_term.setdefault(b.label or "?", {"cnot": 0, "single": 0, "strings": 0})
            slot["cnot"] += c
            slot["single"] += s
            slot["strings"] += 1
        counts = prog.counts()
        report.cnot_count += counts["cnot"]
        report.single_qubit_count += counts["single"]
    return report


def _i2_quadruple_max(params, lattice, layout) -> tuple[int, int]:
    """Largest CNOT count of exp(-i I2 dt) over the quadruples (sites, colours), and how many there are."""
    from .hamiltonian import H2_PARTITION, assemble_template, g4i_records

    groups: dict = {}
    for rec in g4i_records(params, lattice, H2_PARTITION):
        key = tuple((leg.mode.site, leg.mode.color) for leg in rec.legs)
        groups.setdefault(key, []).append(rec)
    best = 0
    for recs in groups.values():
        # I2 is the Hermitian part of the quadruple's operator, without the shared prefactor
        tpl = assemble_template("I2", recs, layout)
        best = max(best, count_patterns(tpl.xs, tpl.zs)["cnot"])
    return best, len(groups)


def gate_count_report(params, lattice, layout, terms=None) -> GateCountReport:
    """Count-only: gates of one Trotter step per term, plus the four bound comparisons.

    Nothing is simulated; the counts come from the Pauli patterns each
    template would emit. Bounds are evaluated at (N, V, cutoff) of the run.
    """
    from .hamiltonian import build_template, build_templates

    report = GateCountReport()
    n, vol, cut = params.group_n, lattice.volume, params.boson_cutoff
    report.bounds = resource_bounds(n, vol, cut)
    for tpl in build_templates(params, lattice, layout, terms):
        counts = count_patterns(tpl.xs, tpl.zs)
        report.per_term[tpl.label] = counts
        report.cnot_count += counts["cnot"]
        report.single_qubit_count += counts["single"]
    h1 = report.per_term.get("H1") or count_patterns(*_xz(build_template("H1", params, lattice, layout)))
    fi = report.per_term.get("FI") or count_patterns(*_xz(build_template("FI", params, lattice, layout)))
    g4i = report.per_term.get("G4I") or count_patterns(*_xz(build_template("G4I", params, lattice, layout)))
    i2_max, n_quads = _i2_quadruple_max(params, lattice, layout)
    report.measured_vs_bound = {
        "I1": {"measured": h1["cnot"], "bound": report.bounds["I1"]},
        "H_FI": {"measured": fi["cnot"], "bound": report.bounds["H_FI"]},
        "I2": {"measured": i2_max, "bound": report.bounds["I2"], "quadruples": n_quads},
        "H_G4I": {"measured": g4i["cnot"], "bound": report.bounds["H_G4I"]},
    }
    return report


def _xz(tpl):
    return tpl.xs, tpl.zs
