import math

import numpy as np
import pytest

from oracles import dense_exp, embed, random_state, X
from ymsim.circuit import Gate, GateProgram, trotter_step
from ymsim.encoding import build_layout
from ymsim.errors import CapacityError, ConfigurationError, InvalidConfig
from ymsim.hamiltonian import build_templates
from ymsim.lattice import build_lattice, enumerate_modes
from ymsim.pauli import PauliSum
from ymsim.simulator import (StateVector, apply_gate, build_register, evolve, exact_evolution_oracle, fidelity,
                             initial_statevector, measure_occupations, norm_drift, occupation_rows, oracle_states,
                             run_program, run_program_fused, sparse_evolution_oracle, unary_probability)
from ymsim.theory import ModelParams


def model(n=2, pol=4, g=0.3, steps=4, dt=0.25, cutoff=1, ghosts=False):
    params = ModelParams(group_n=n, coupling_g=g, polarization_count=pol, gluon_mass_regulator=1.0,
                         steps_n=steps, dt=dt, boson_cutoff=cutoff, include_ghosts=ghosts)
    lattice = build_lattice(2 * math.pi, 1)
    _, ordering = enumerate_modes(lattice, params)
    return params, lattice, build_layout(ordering, params)


def quark_state(layout):
    return {layout.vacuum_index() | 1 << layout.qubit_of(layout.ordering.fermion_modes[0]): 1.0}


def test_apply_gate_examples():
    s = StateVector.basis(2, 0)
    apply_gate(s, Gate("H", (0,)))
    assert np.allclose(s.amplitudes, [1 / math.sqrt(2), 1 / math.sqrt(2), 0, 0])
    apply_gate(s, Gate("CNOT", (0, 1)))
    assert np.allclose(s.amplitudes, [1 / math.sqrt(2), 0, 0, 1 / math.sqrt(2)])
    t = StateVector.basis(1, 1)
    apply_gate(t, Gate("RZ", (0,), 1.0))
    assert t.amplitudes[1] == pytest.approx(np.exp(0.5j))
    with pytest.raises(IndexError):
        apply_gate(StateVector.basis(1), Gate("X", (2,)))


def test_apply_gate_matches_kron():
    rng = np.random.default_rng(1)
    psi = random_state(3, rng)
    s = StateVector(psi.copy(), 3)
    apply_gate(s, Gate("X", (1,)))
    assert np.allclose(s.amplitudes, embed({1: X}, 3) @ psi)


def test_statevector_validation_and_cap():
    with pytest.raises(ConfigurationError):
        StateVector(np.zeros(3), 2)
    with pytest.raises(CapacityError):
        StateVector.basis(40)


def test_run_program_matches_dense_matrix():
    rng = np.random.default_rng(2)
    terms = [("A", PauliSum.from_letters("X0 Y2", 0.4) + PauliSum.from_letters("Z1", -0.3)),
             ("B", PauliSum.from_letters("Y0 Y1 Y2", 0.8))]
    prog = trotter_step(terms, 0.3, 3)
    psi = np.kron([1.0, 0.0], random_state(3, rng))
    out = run_program(StateVector(psi.copy(), 4), prog)
    assert np.abs(out.amplitudes - prog.dense_matrix() @ psi).max() < 1e-12
    fused = run_program_fused(StateVector(psi[:8].copy(), 3), prog)
    assert np.abs(fused.amplitudes - out.amplitudes[:8]).max() < 1e-12
    with pytest.raises(ConfigurationError):
        run_program(StateVector(psi[:8].copy(), 3), prog)
    with pytest.raises(ConfigurationError):
        run_program_fused(StateVector(psi.copy(), 4), prog)


def test_program_then_adjoint_is_identity():
    rng = np.random.default_rng(3)
    prog = trotter_step([("A", PauliSum.from_letters("X0 Z1", 1.1) + PauliSum.from_letters("Y1", 0.2))], 0.7, 2)
    psi = random_state(3, rng)
    s = run_program(StateVector(psi.copy(), 3), prog)
    run_program(s, prog.adjoint())
    assert np.abs(s.amplitudes - psi).max() < 1e-12


def test_oracles_agree():
    rng = np.random.default_rng(4)
    hs = [PauliSum.from_letters("X0 X1", 0.5) + PauliSum.from_letters("Z0", 0.2),
          PauliSum.from_letters("Y0 Z1", -0.4)]
    psi = random_state(2, rng)
    u = exact_evolution_oracle(hs, 0.3, 2)
    manual = dense_exp(hs[1].to_dense_matrix(2), 0.3) @ dense_exp(hs[0].to_dense_matrix(2), 0.3)
    assert np.abs(u - manual).max() < 1e-12
    assert np.abs(sparse_evolution_oracle(hs, 0.3, 2, psi) - u @ psi).max() < 1e-10
    with pytest.raises(CapacityError):
        exact_evolution_oracle(hs, 0.3, 20, limit=14)


def test_register_is_support_of_terms():
    params, lattice, layout = model()
    templates = build_templates(params, lattice, layout, "H1")
    comps = quark_state(layout)
    reg = build_register(layout, templates, comps)
    assert reg.active == (0, 1, 2, 3, 8, 9, 16, 17, 24, 25)
    full = next(iter(comps))
    assert reg.full_index(reg.local_index(full)) == full
    with pytest.raises(InvalidConfig):
        reg.local_index(full ^ (1 << 4))
    with pytest.raises(CapacityError):
        build_register(layout, templates, comps, qubit_limit=5)


def test_initial_state_must_be_normalized():
    params, lattice, layout = model()
    reg = build_register(layout, [], {layout.vacuum_index(): 1.0})
    with pytest.raises(InvalidConfig):
        initial_statevector(reg, {layout.vacuum_index(): 0.5})


def test_vacuum_occupations():
    params, lattice, layout = model(pol=2, cutoff=2)
    reg = build_register(layout, [], {layout.vacuum_index(): 1.0})
    dist = measure_occupations(initial_statevector(reg, {layout.vacuum_index(): 1.0}), reg)
    for mode in layout.fermion_qubits:
        assert list(dist.of(mode)) == [1.0, 0.0]
    for mode in layout.boson_blocks:
        assert list(dist.of(mode)) == [1.0, 0.0, 0.0]


def test_occupations_of_superposition():
    params, lattice, layout = model(pol=2, cutoff=2)
    gluon = layout.ordering.boson_modes[0]
    block = layout.block_of(gluon)
    vac = layout.vacuum_index()
    two = vac & ~(1 << block[0]) | 1 << block[2]
    comps = {vac: math.sqrt(0.25), two: math.sqrt(0.75)}
    reg = build_register(layout, [], comps)
    dist = measure_occupations(initial_statevector(reg, comps), reg)
    assert dist.of(gluon) == pytest.approx([0.25, 0.0, 0.75])
    assert unary_probability(initial_statevector(reg, comps), reg) == pytest.approx(1.0)


def test_shot_sampling_is_seeded():
    params, lattice, layout = model(pol=2)
    q = layout.ordering.fermion_modes[0]
    vac = layout.vacuum_index()
    comps = {vac: math.sqrt(0.5), vac | 1 << layout.qubit_of(q): math.sqrt(0.5)}
    reg = build_register(layout, [], comps)
    state = initial_statevector(reg, comps)
    a = measure_occupations(state, reg, shots=1000, seed=7).of(q)
    b = measure_occupations(state, reg, shots=1000, seed=7).of(q)
    assert list(a) == list(b)
    assert abs(a[1] - 0.5) < 0.1


def test_evolve_at_zero_coupling_is_stationary():
    params, lattice, layout = model(pol=2, g=0.0, steps=5)
    traj = evolve(params, lattice, layout, terms="FI")
    assert traj.register.n_active == 0
    assert norm_drift(traj) == 0.0
    rows = occupation_rows(traj)
    assert {p for step, t, k, occ, p in rows if occ == 0 and k < 8} == {1.0}


def test_evolve_matches_oracle_and_gate_path():
    params, lattice, layout = model(pol=4, g=0.002, steps=4)
    templates = build_templates(params, lattice, layout, "H1")
    comps = quark_state(layout)
    fused = evolve(params, lattice, layout, templates=templates, initial=comps)
    gates = evolve(params, lattice, layout, templates=templates, initial=comps, fused=False)
    assert np.abs(fused.state.amplitudes - gates.state.amplitudes).max() < 1e-10
    psi0 = initial_statevector(fused.register, comps).amplitudes
    exact = oracle_states(params, templates, fused.register, psi0)
    # strings within a factor need not commute; weak coupling keeps that splitting error small
    assert fidelity(fused.state.amplitudes, exact) > 1 - 1e-4
    assert norm_drift(fused) < 1e-12
    assert unary_probability(fused.state, fused.register) == pytest.approx(1.0)


def test_snapshot_stride():
    params, lattice, layout = model(pol=4, steps=5)
    traj = evolve(params, lattice, layout, terms="H1", initial=quark_state(layout), stride=2)
    assert [s[0] for s in traj.snapshots] == [0, 2, 4, 5]
    assert [s[1] for s in traj.snapshots] == pytest.approx([0.0, 0.5, 1.0, 1.25])
    assert len(traj.norms) == 5
    with pytest.raises(ConfigurationError):
        evolve(params, lattice, layout, terms="H1", stride=0)


def test_quark_state_evolves_under_h1():
    params, lattice, layout = model(pol=4, g=2.0, steps=6, dt=0.25)
    traj = evolve(params, lattice, layout, terms="H1", initial=quark_state(layout))
    kappa0 = [p for step, t, k, occ, p in occupation_rows(traj) if k == 0 and occ == 1]
    assert kappa0[0] == 1.0 and kappa0[-1] < 1.0


def test_empty_program_leaves_state():
    s = StateVector.basis(2, 3)
    run_program(s, GateProgram(qubit_count=2))
    assert s.amplitudes[3] == 1.0
