"""Dense statevector execution, exact oracles and occupation read-out.

Only the qubits that the selected Hamiltonian terms touch, or that differ
between components of the initial state, are simulated. Every other qubit of
the layout keeps a fixed bit value that is stored once on the register.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.linalg import expm_multiply

from . import _kernels as K
from .circuit import Gate, GateProgram, step_times, trotter_step
from .encoding import DEFAULT_QUBIT_LIMIT, RegisterLayout
from .errors import CapacityError, ConfigurationError, InvalidConfig
from .lattice import ModeKey
from .pauli import ORACLE_QUBIT_LIMIT, PauliSum

NORM_TOLERANCE = 1e-9
DENSE_ORACLE_MAX = 10  # above this many active qubits the oracle uses sparse expm_multiply


@dataclass
class StateVector:
    amplitudes: np.ndarray
    qubit_count: int

    def __post_init__(self):
        self.amplitudes = np.ascontiguousarray(self.amplitudes, dtype=np.complex128)
        if self.amplitudes.shape != (1 << self.qubit_count,):
            raise ConfigurationError(f"{self.amplitudes.shape[0]} amplitudes do not fit {self.qubit_count} qubits")

    @classmethod
    def basis(cls, qubit_count: int, index: int = 0) -> "StateVector":
        if qubit_count > DEFAULT_QUBIT_LIMIT:
            raise CapacityError(f"{qubit_count} qubits exceed the statevector cap {DEFAULT_QUBIT_LIMIT}")
        amps = np.zeros(1 << qubit_count, dtype=np.complex128)
        amps[index] = 1.0
        return cls(amps, qubit_count)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def copy(self) -> "StateVector":
        return StateVector(self.amplitudes.copy(), self.qubit_count)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


def apply_gate(state: StateVector, gate: Gate) -> StateVector:
    for q in gate.targets:
        if not 0 <= q < state.qubit_count:
            raise IndexError(f"gate {gate.to_text()} targets qubit {q} of a {state.qubit_count}-qubit state")
    amps = state.amplitudes
    if gate.kind == "CNOT":
        K.apply_cnot(amps, gate.targets[0], gate.targets[1])
    else:
        m = gate.matrix()
        K.apply_1q(amps, gate.targets[0], m[0, 0], m[0, 1], m[1, 0], m[1, 1])
    return state


def run_program(state: StateVector, program: GateProgram) -> StateVector:
    """Apply every gate in order (auxiliary included in the register)."""
    if program.qubit_count != state.qubit_count:
        raise ConfigurationError(f"program on {program.qubit_count} qubits, state on {state.qubit_count}")
    for g in program.gates:
        apply_gate(state, g)
    return state


def run_program_fused(state: StateVector, program: GateProgram) -> StateVector:
    """Apply each synthesized rotation block as one exp(-i theta P) on the working register.

    Equivalent to ``run_program`` with the auxiliary in |0>, which is left out.
    """
    if program.qubit_count - 1 != state.qubit_count:
        raise ConfigurationError("fused execution needs the working register without the auxiliary")
    covered = sum(b.stop - b.start for b in program.blocks)
    if covered != len(program.gates):
        raise ConfigurationError("program contains gates outside rotation blocks")
    for b in program.blocks:
        K.apply_pauli_rotation(state.amplitudes, b.x, b.z, b.theta, 1j ** ((b.x & b.z).bit_count() & 3))
    return state


# ---------------------------------------------------------------------------
# oracles


def _hermitian_exp(h: np.ndarray, dt: float) -> np.ndarray:
    vals, vecs = np.linalg.eigh(h)
    return (vecs * np.exp(-1j * vals * dt)) @ vecs.conj().T


def exact_evolution_oracle(hamiltonians, dt: float, n_qubits: int, limit: int = ORACLE_QUBIT_LIMIT) -> np.ndarray:
    """U = exp(-i H_{n-1} dt) ... exp(-i H_0 dt) from dense eigendecompositions.

    ``hamiltonians`` lists H(t_k) for k = 0..n-1, each a PauliSum or a list of
    PauliSums to be added.
    """
    if n_qubits > limit:
        raise CapacityError(f"exact oracle on {n_qubits} qubits exceeds the limit {limit}")
    dim = 1 << n_qubits
    u = np.eye(dim, dtype=complex)
    for h in hamiltonians:
        mat = _as_sum(h).to_dense_matrix(n_qubits, limit=limit)
        u = _hermitian_exp(mat, dt) @ u
    return u


def sparse_evolution_oracle(hamiltonians, dt: float, n_qubits: int, psi: np.ndarray) -> np.ndarray:
    """Apply the same slice product to one vector with sparse exponentials."""
    out = np.asarray(psi, dtype=complex).copy()
    for h in hamiltonians:
        mat = _as_sum(h).to_sparse(n_qubits)
        out = expm_multiply(-1j * dt * mat, out)
    return out


def _as_sum(h) -> PauliSum:
    if isinstance(h, PauliSum):
        return h
    total = PauliSum()
    for part in h:
        total += part
    return total


# ---------------------------------------------------------------------------
# active register


@dataclass(frozen=True)
class ActiveRegister:
    """Subset of layout qubits that is simulated, in increasing layout order."""

    layout: RegisterLayout
    active: tuple[int, ...]
    frozen_bits: int  # layout-index bits of the inactive qubits

    @property
    def n_active(self) -> int:
        return len(self.active)

    @property
    def position(self) -> dict:
        return {q: i for i, q in enumerate(self.active)}

    def local_mask(self, mask: int) -> int:
        pos = self.position
        out = 0
        while mask:
            low = mask & -mask
            out |= 1 << pos[low.bit_length() - 1]
            mask ^= low
        return out

    def local_index(self, full_index: int) -> int:
        if (full_index & ~self.active_mask) != self.frozen_bits:
            raise InvalidConfig("basis state disagrees with the frozen qubits of the register")
        out = 0
        for i, q in enumerate(self.active):
            out |= ((full_index >> q) & 1) << i
        return out

    @property
    def active_mask(self) -> int:
        return sum(1 << q for q in self.active)

    def full_index(self, local_index: int) -> int:
        out = self.frozen_bits
        for i, q in enumerate(self.active):
            out |= ((local_index >> i) & 1) << q
        return out

    def remap_sum(self, ps: PauliSum) -> PauliSum:
        return ps.remap(self.position)

    def to_json(self) -> dict:
        return {"active_qubits": list(self.active), "frozen_bits": str(self.frozen_bits),
                "layout_qubits": self.layout.total_qubits}


def build_register(layout: RegisterLayout, templates, initial: dict,
                   qubit_limit: int = DEFAULT_QUBIT_LIMIT) -> ActiveRegister:
    support = set()
    for tpl in templates:
        support |= tpl.support()
    indices = list(initial)
    varying = 0
    for idx in indices[1:]:
        varying |= idx ^ indices[0]
    support |= {q for q in range(layout.total_qubits) if varying >> q & 1}
    active = tuple(sorted(support))
    mask = sum(1 << q for q in active)
    register = ActiveRegister(layout, active, indices[0] & ~mask)
    if register.n_active > qubit_limit:
        raise CapacityError(f"{register.n_active} active qubits exceed the statevector cap {qubit_limit}; "
                            "narrow the term filter", layout=layout)
    return register


def initial_statevector(register: ActiveRegister, initial: dict) -> StateVector:
    state = StateVector.basis(register.n_active, 0)
    state.amplitudes[0] = 0.0
    for idx, amp in initial.items():
        state.amplitudes[register.local_index(idx)] += amp
    norm = state.norm()
    if abs(norm - 1.0) > NORM_TOLERANCE:
        raise InvalidConfig(f"initial state has norm {norm}")
    return state


# ---------------------------------------------------------------------------
# occupations


@dataclass
class OccupationDistribution:
    time_t: float
    probabilities: dict  # ModeKey -> array over occupation values

    def of(self, mode: ModeKey) -> np.ndarray:
        return self.probabilities[mode]


def _marginal(probs: np.ndarray, positions) -> np.ndarray:
    # distribution over the joint bit pattern of ``positions`` (bit i = positions[i])
    n = probs.shape[0].bit_length() - 1
    tensor = probs.reshape((2,) * n) if n else probs
    axes_keep = [n - 1 - p for p in positions]  # reshape puts the top qubit first
    other = tuple(a for a in range(n) if a not in axes_keep)
    reduced = tensor.sum(axis=other) if other else tensor
    # reduced axes are in increasing axis order; reorder so positions[0] is the lowest bit
    order = sorted(axes_keep)
    perm = [order.index(a) for a in reversed(axes_keep)]
    return np.transpose(reduced, perm).reshape(-1) if positions else np.array([reduced.sum()])


def measure_occupations(state: StateVector, register: ActiveRegister, time_t: float = 0.0,
                        shots: int | None = None, seed: int | None = None) -> OccupationDistribution:
    """Marginal occupation probabilities of every mode.

    With ``shots`` the marginals are estimated from that many seeded samples
    of the full distribution instead of read off exactly.
    """
    probs = state.probabilities()
    if shots is not None:
        rng = np.random.default_rng(seed)
        counts = rng.multinomial(shots, probs / probs.sum())
        probs = counts / shots
    layout = register.layout
    pos = register.position
    out = {}
    for mode, q in layout.fermion_qubits.items():
        if q in pos:
            marg = _marginal(probs, [pos[q]])
            out[mode] = np.array([marg[0], marg[1]])
        else:
            bit = (register.frozen_bits >> q) & 1
            out[mode] = np.array([1.0 - bit, float(bit)])
    for mode, block in layout.boson_blocks.items():
        act = [q for q in block if q in pos]
        marg = _marginal(probs, [pos[q] for q in act]) if act else np.array([1.0])
        dist = np.zeros(len(block))
        for h, q in enumerate(block):
            # the whole block must read one-hot at h; frozen block bits are checked directly
            frozen_ok = all(((register.frozen_bits >> b) & 1) == (b == q) for b in block if b not in pos)
            if frozen_ok:
                dist[h] = marg[1 << act.index(q)] if q in pos else marg[0]
        out[mode] = dist
    return OccupationDistribution(time_t, out)


def unary_probability(state: StateVector, register: ActiveRegister) -> float:
    """Total probability of basis states whose gluon blocks are all one-hot."""
    n = register.n_active
    idx = np.arange(1 << n, dtype=np.int64)
    ok = np.ones(idx.shape, dtype=bool)
    pos = register.position
    for block in register.layout.boson_blocks.values():
        count = np.zeros(idx.shape, dtype=np.int64)
        for q in block:
            if q in pos:
                count += (idx >> pos[q]) & 1
            else:
                count += (register.frozen_bits >> q) & 1
        ok &= count == 1
    return float(state.probabilities()[ok].sum())


# ---------------------------------------------------------------------------
# evolution


@dataclass
class LocalTemplate:
    label: str
    xs: np.ndarray
    zs: np.ndarray
    yphase: np.ndarray
    source: object

    def coefficients(self, t: float) -> np.ndarray:
        return self.source.coefficients(t)


def localize(template, register: ActiveRegister) -> LocalTemplate:
    xs = np.array([register.local_mask(x) for x in template.xs], dtype=np.int64)
    zs = np.array([register.local_mask(z) for z in template.zs], dtype=np.int64)
    yphase = np.array([1j ** ((x & z).bit_count() & 3) for x, z in zip(xs.tolist(), zs.tolist())], dtype=complex)
    return LocalTemplate(template.label, xs, zs, yphase, template)


def fused_step(state: StateVector, local_templates, t: float, dt: float) -> None:
    """One slice: factors right to left, strings of a factor in stored (sorted) order."""
    amps = state.amplitudes
    for lt in reversed(local_templates):
        coeffs = lt.coefficients(t)
        for x, z, c, ph in zip(lt.xs.tolist(), lt.zs.tolist(), coeffs.tolist(), lt.yphase.tolist()):
            K.apply_pauli_rotation(amps, x, z, c * dt, ph)


def gate_step_program(local_templates, t: float, dt: float, n_active: int) -> GateProgram:
    terms = []
    for lt in local_templates:
        ps = PauliSum()
        ps.terms = {(x, z): complex(c) for x, z, c in zip(lt.xs.tolist(), lt.zs.tolist(), lt.coefficients(t))}
        terms.append((lt.label, ps))
    return trotter_step(terms, dt, n_active)


@dataclass
class Trajectory:
    times: list
    norms: list
    snapshots: list  # (step, t, OccupationDistribution)
    state: StateVector
    register: ActiveRegister
    states: list = field(default_factory=list)


def initial_components(layout: RegisterLayout, initial) -> dict:
    """Normalize an initial-state description to {layout basis index: amplitude}."""
    if initial is None:
        return {layout.vacuum_index(): 1.0}
    if isinstance(initial, int):
        return {initial: 1.0}
    return dict(initial)


def evolve(params, lattice, layout, terms=None, initial=None, stride: int = 1, fused: bool = True,
           qubit_limit: int = DEFAULT_QUBIT_LIMIT, templates=None, midpoint: bool = False,
           keep_states: bool = False, shots: int | None = None, seed: int | None = None) -> Trajectory:
    """n Trotter steps from ``initial`` (vacuum by default); occupations every ``stride`` steps.

    ``fused=False`` runs the synthesized gate programs, auxiliary included.
    """
    from .hamiltonian import build_templates

    if stride < 1:
        raise ConfigurationError("snapshot stride must be >= 1")
    templates = templates if templates is not None else build_templates(params, lattice, layout, terms)
    comps = initial_components(layout, initial)
    limit = qubit_limit if fused else qubit_limit - 1
    register = build_register(layout, templates, comps, limit)
    state = initial_statevector(register, comps)
    local = [localize(tpl, register) for tpl in templates]
    if not fused:
        state = StateVector(np.kron([1.0, 0.0], state.amplitudes), register.n_active + 1)
    times = step_times(params, midpoint)
    norms = []
    snaps = []
    states = []

    def snapshot(step, t):
        work = state if fused else _drop_aux(state)
        snaps.append((step, t, measure_occupations(work, register, t, shots=shots,
                                                   seed=None if seed is None else seed + step)))
        if keep_states:
            states.append(work.copy())

    snapshot(0, params.t0)
    for k, t in enumerate(times):
        if fused:
            fused_step(state, local, t, params.dt)
        else:
            run_program(state, gate_step_program(local, t, params.dt, register.n_active))
        norms.append(state.norm())
        step = k + 1
        if step % stride == 0 or step == len(times):
            snapshot(step, params.t0 + step * params.dt)
    final = state if fused else _drop_aux(state)
    return Trajectory(times=times, norms=norms, snapshots=snaps, state=final, register=register, states=states)


def _drop_aux(state: StateVector) -> StateVector:
    half = 1 << (state.qubit_count - 1)
    return StateVector(state.amplitudes[:half].copy(), state.qubit_count - 1)


def oracle_states(params, templates, register: ActiveRegister, psi0: np.ndarray, midpoint: bool = False,
                  sparse: bool | None = None) -> np.ndarray:
    """Exact slice product applied to ``psi0`` on the active register.

    Small registers use dense eigendecompositions; larger ones use sparse
    ``expm_multiply``, which is far cheaper per slice.
    """
    local_h = []
    for t in step_times(params, midpoint):
        total = PauliSum()
        for tpl in templates:
            total += register.remap_sum(tpl.at(t))
        local_h.append(total)
    n = register.n_active
    if sparse is None:
        sparse = n > DENSE_ORACLE_MAX
    if sparse:
        return sparse_evolution_oracle(local_h, params.dt, n, psi0)
    return exact_evolution_oracle(local_h, params.dt, n) @ psi0


def occupation_rows(traj: Trajectory) -> list[tuple]:
    """(step, t, mode_kappa, occupation, probability) rows in a fixed order."""
    ordering = traj.register.layout.ordering
    rows = []
    for step, t, dist in traj.snapshots:
        for mode in ordering.modes:
            for occ, p in enumerate(dist.probabilities[mode]):
                rows.append((step, t, ordering.kappa(mode), occ, float(p)))
    return rows


def norm_drift(traj: Trajectory) -> float:
    return max((abs(n - 1.0) for n in traj.norms), default=0.0)


def fidelity(a: np.ndarray, b: np.ndarray) -> float:
    return float(abs(np.vdot(a, b)) ** 2)


def l2_distance(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.linalg.norm(np.asarray(a) - np.asarray(b)))
