"""Colour-singlet quark-antiquark initial states and the meson-formation demo.

The two-quark colour basis is labelled 1..9 with label 3(i-1)+j for a quark of
colour i and an antiquark of colour j (1-based), so |1> = |q1 qbar1>,
|5> = |q2 qbar2>, |9> = |q3 qbar3>. On the register the pair state is
b_q^dag d_qbar^dag |vac>; with quarks ordered before antiquarks its amplitude
on the occupied basis index is +1.
"""

from __future__ import annotations

import math

import numpy as np

from .circuit import Gate, GateProgram
from .errors import ConfigurationError, InvalidConfig
from .lattice import ModeKey, Species
from .runs import RunConfig, RunResult, RunSetup, run_evolution
from .simulator import ActiveRegister, StateVector, build_register, initial_statevector

ORIGIN = (0, 0, 0)


def color_label(i: int, j: int, n: int = 3) -> int:
    """1-based basis label of (quark colour i, antiquark colour j), colours 1-based."""
    if not (1 <= i <= n and 1 <= j <= n):
        raise InvalidConfig(f"colours ({i}, {j}) outside 1..{n}")
    return n * (i - 1) + j


def label_colors(label: int, n: int = 3) -> tuple[int, int]:
    if not 1 <= label <= n * n:
        raise InvalidConfig(f"label {label} outside 1..{n * n}")
    return (label - 1) // n + 1, (label - 1) % n + 1


def build_t_matrix() -> np.ndarray:
    """The 9x9 SU(3) pair transformation; its first column is the colour singlet."""
    r3 = math.sqrt(3.0)
    t = np.zeros((9, 9), dtype=complex)
    for k in (1, 2, 3, 5, 6, 7):
        t[k, k] = r3
    t[0, 0] = t[4, 0] = t[8, 0] = 1.0
    t[0, 4] = 0.5 * (-1 + 1j * r3)
    t[4, 4] = -0.5 * (1 + 1j * r3)
    t[8, 4] = 1.0
    t[0, 8] = 0.5 * (-1j + r3)
    t[4, 8] = -0.5 * (1j + r3)
    t[8, 8] = 1j
    return t / r3


def analog_t_matrix(n: int) -> np.ndarray:
    """n^2 x n^2 unitary with the singlet as first column.

    Acts as the discrete Fourier transform on the colour-diagonal states
    |q_i qbar_i> and as the identity elsewhere. For n = 3 it differs from
    ``build_t_matrix`` except in the first column.
    """
    if n < 2:
        raise InvalidConfig("need at least two colours")
    diag = [color_label(i, i, n) - 1 for i in range(1, n + 1)]
    t = np.eye(n * n, dtype=complex)
    f = np.exp(2j * np.pi * np.outer(np.arange(n), np.arange(n)) / n) / math.sqrt(n)
    t[np.ix_(diag, diag)] = f
    return t


def t_matrix_for(n: int) -> np.ndarray:
    return build_t_matrix() if n == 3 else analog_t_matrix(n)


def pair_modes(layout, s1: int = 0, s2: int = 0, p1=ORIGIN, p2=ORIGIN) -> list[tuple[ModeKey, ModeKey]]:
    """(quark, antiquark) mode pairs in colour order, one per colour."""
    n = _colors(layout)
    pairs = []
    for c in range(n):
        q = ModeKey(Species.QUARK, tuple(p1), c, s1)
        qb = ModeKey(Species.ANTIQUARK, tuple(p2), c, s2)
        if q not in layout.fermion_qubits or qb not in layout.fermion_qubits:
            raise InvalidConfig(f"pair modes {q}, {qb} are not in the layout")
        pairs.append((q, qb))
    return pairs


def _colors(layout) -> int:
    return 1 + max(m.color for m in layout.ordering.of_species(Species.QUARK))


def color_basis_indices(layout, s1: int = 0, s2: int = 0, p1=ORIGIN, p2=ORIGIN) -> list[int]:
    """Layout basis index of each colour-basis label, in label order."""
    n = _colors(layout)
    vac = layout.vacuum_index()
    qubit = layout.qubit_of
    out = []
    for i in range(n):
        for j in range(n):
            q = ModeKey(Species.QUARK, tuple(p1), i, s1)
            qb = ModeKey(Species.ANTIQUARK, tuple(p2), j, s2)
            out.append(vac | 1 << qubit(q) | 1 << qubit(qb))
    pair_modes(layout, s1, s2, p1, p2)  # validates membership
    return out


def apply_t(layout, vector, s1: int = 0, s2: int = 0, p1=ORIGIN, p2=ORIGIN) -> dict:
    """T (or its analog) applied to a colour-basis vector, as layout components."""
    n = _colors(layout)
    out = t_matrix_for(n) @ np.asarray(vector, dtype=complex)
    idx = color_basis_indices(layout, s1, s2, p1, p2)
    return {k: complex(a) for k, a in zip(idx, out) if a != 0}


def singlet_components(layout, s1: int = 0, s2: int = 0, p1=ORIGIN, p2=ORIGIN) -> dict:
    """(1/sqrt(N)) sum_i |q_i qbar_i> for any N; the first colour-basis state mapped by T."""
    n = _colors(layout)
    e1 = np.zeros(n * n)
    e1[0] = 1.0
    return apply_t(layout, e1, s1, s2, p1, p2)


def singlet_register(layout, s1: int = 0, s2: int = 0, p1=ORIGIN, p2=ORIGIN, templates=()) -> ActiveRegister:
    """Register holding the pair qubits plus the support of ``templates``."""
    return build_register(layout, templates, singlet_components(layout, s1, s2, p1, p2))


def prepare_singlet(register: ActiveRegister, s1: int = 0, s2: int = 0, p1=ORIGIN, p2=ORIGIN) -> StateVector:
    """SU(3) colour singlet injected as amplitudes on ``register``."""
    if _colors(register.layout) != 3:
        raise ConfigurationError("prepare_singlet needs SU(3); use prepare_singlet_analog for other N")
    return prepare_singlet_analog(register, s1, s2, p1, p2)


def prepare_singlet_analog(register: ActiveRegister, s1: int = 0, s2: int = 0, p1=ORIGIN, p2=ORIGIN) -> StateVector:
    comps = singlet_components(register.layout, s1, s2, p1, p2)
    try:
        return initial_statevector(register, comps)
    except InvalidConfig:
        raise ConfigurationError("the pair qubits must be active on the register") from None


def _ry(q: int, theta: float) -> list[Gate]:
    # RY(theta) = S RX(theta) S^dag, RX = H RZ H; the RZ phases of S and S^dag cancel
    return [Gate("RZ", (q,), -0.5 * math.pi), Gate("H", (q,)), Gate("RZ", (q,), theta),
            Gate("H", (q,)), Gate("RZ", (q,), 0.5 * math.pi)]


def _cry(control: int, target: int, theta: float) -> list[Gate]:
    return _ry(target, 0.5 * theta) + [Gate("CNOT", (control, target))] + _ry(target, -0.5 * theta) + \
        [Gate("CNOT", (control, target))]


def singlet_prep_program(quark_qubits, antiquark_qubits, n_qubits: int) -> GateProgram:
    """Gates taking |0...0> on the pair qubits to (1/sqrt(N)) sum_i |q_i qbar_i>.

    A W state is spread over the quark colours and copied onto the antiquark
    colours. The gate count depends only on N.
    """
    qs, qbs = list(quark_qubits), list(antiquark_qubits)
    n = len(qs)
    if n != len(qbs) or n < 2:
        raise InvalidConfig("need matching quark and antiquark qubits for at least two colours")
    gates = [Gate("X", (qs[0],))]
    for k in range(n - 1):
        # keep amplitude sqrt(1/(n-k)) on colour k, pass the rest to colour k+1
        theta = 2.0 * math.acos(math.sqrt(1.0 / (n - k)))
        gates += _cry(qs[k], qs[k + 1], theta)
        gates.append(Gate("CNOT", (qs[k + 1], qs[k])))
    gates += [Gate("CNOT", (q, qb)) for q, qb in zip(qs, qbs)]
    return GateProgram(gates=gates, qubit_count=n_qubits, metadata={"labels": ["singlet_prep"], "global_phase": 0.0})


def register_prep_program(register: ActiveRegister, s1: int = 0, s2: int = 0, p1=ORIGIN, p2=ORIGIN) -> GateProgram:
    """Preparation program on the local qubits of ``register``.

    Assumes the pair qubits start empty; the frozen and boson bits are set by
    the register's base index.
    """
    pos = register.position
    pairs = pair_modes(register.layout, s1, s2, p1, p2)
    lay = register.layout
    return singlet_prep_program([pos[lay.qubit_of(q)] for q, _ in pairs],
                                [pos[lay.qubit_of(qb)] for _, qb in pairs], register.n_active)


def meson_demo(config: RunConfig, s1: int = 0, s2: int = 0, p1=ORIGIN, p2=ORIGIN) -> RunResult:
    """Evolve the colour singlet pair and record occupation probabilities.

    SU(3) uses the T matrix, other N the analog singlet. Full SU(3) registers
    exceed the dense cap, so they need a narrow term filter; otherwise a
    ``CapacityError`` comes out of the evolution.
    """
    setup = RunSetup.from_config(config)
    comps = singlet_components(setup.layout, s1, s2, p1, p2)
    return run_evolution(config, initial=comps, kind="demo-meson")
