import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import LOWER, RAISE, Z, boson_create, embed, fermion_create, letters_matrix, truncated_raise, unary_index
from ymsim.encoding import RegisterLayout
from ymsim.errors import CapacityError, InvalidParameter
from ymsim.lattice import ModeKey, ModeOrdering, Species
from ymsim.pauli import (PauliString, PauliSum, anticommutator, commutator, ghost_charge, ghost_field_ops,
                         gluon_number, jw_boson_ops, jw_fermion_ops, number_operator, pauli_mul, quark_charge)

O = (0, 0, 0)

letter_maps = st.dictionaries(st.integers(0, 3), st.sampled_from("IXYZ"), max_size=4)
coeffs = st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False)


def small_system(cutoff=1, n_bosons=2):
    """Five fermion modes (two quarks, one antiquark, a ghost and an antighost) plus gluons."""
    fermions = [ModeKey(Species.QUARK, O, 0, 0), ModeKey(Species.QUARK, O, 0, 1),
                ModeKey(Species.ANTIQUARK, O, 0, 0), ModeKey(Species.GHOST, O, 0),
                ModeKey(Species.ANTIGHOST, O, 0)]
    bosons = [ModeKey(Species.GLUON, O, a, 1) for a in range(n_bosons)]
    ordering = ModeOrdering(tuple(fermions + bosons), len(fermions))
    blocks, nxt = {}, len(fermions)
    for m in bosons:
        blocks[m] = tuple(range(nxt, nxt + cutoff + 1))
        nxt += cutoff + 1
    layout = RegisterLayout(ordering, cutoff, {m: k for k, m in enumerate(fermions)}, blocks, nxt)
    return ordering, layout


def test_pauli_mul_examples():
    x, y = PauliString.from_letters("X0"), PauliString.from_letters("Y0")
    assert pauli_mul(x, y) == PauliString(1j, 0, 1)
    assert pauli_mul(x, x) == PauliString(1.0, 0, 0)
    a, b = PauliString.from_letters("X0 Z1"), PauliString.from_letters("Y0 Z1")
    assert pauli_mul(a, b) == PauliString.from_letters("Z0", 1j)


@settings(max_examples=200, deadline=None)
@given(letter_maps, letter_maps, coeffs, coeffs)
def test_product_matches_dense(la, lb, ca, cb):
    a, b = PauliString.from_letters(la, ca), PauliString.from_letters(lb, cb)
    prod = pauli_mul(a, b)
    dense = letters_matrix(prod.letters, 4) * prod.coeff
    want = (ca * letters_matrix(a.letters, 4)) @ (cb * letters_matrix(b.letters, 4))
    assert np.abs(dense - want).max() < 1e-12


@settings(max_examples=100, deadline=None)
@given(letter_maps, letter_maps, letter_maps)
def test_product_associative(la, lb, lc):
    a, b, c = (PauliString.from_letters(l) for l in (la, lb, lc))
    assert pauli_mul(pauli_mul(a, b), c) == pauli_mul(a, pauli_mul(b, c))


def test_canonical_form_drops_identity():
    s = PauliString.from_letters({0: "I", 2: "Z"})
    assert s.letters == {2: "Z"} and s.weight == 1
    with pytest.raises(InvalidParameter):
        PauliString.from_letters({0: "Q"})


def test_sum_combines_duplicates():
    s = PauliSum.from_letters("X0 Z1", 1.0) + PauliSum.from_letters("X0 Z1", 2.0)
    assert len(s) == 1 and s.terms[(1, 2)] == 3.0
    assert len((s - s).simplify()) == 0


def test_dense_examples():
    assert np.allclose(PauliSum.from_letters("Z0").to_dense_matrix(1), np.diag([1, -1]))
    x0 = PauliSum.from_letters("X0").to_dense_matrix(2)
    perm = np.zeros((4, 4))
    for k in range(4):
        perm[k ^ 1, k] = 1
    assert np.allclose(x0, perm)
    with pytest.raises(CapacityError):
        PauliSum.from_letters("Z0").to_dense_matrix(13)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(letter_maps, coeffs), max_size=5))
def test_matmul_adjoint_dense_consistency(items):
    a = PauliSum()
    for letters, c in items:
        a += PauliSum.from_letters(letters, c)
    b = PauliSum.from_letters("X0 Y2", 0.5) + PauliSum.from_letters("Z1", 1j)
    da, db = a.to_dense_matrix(4), b.to_dense_matrix(4)
    assert np.abs((a @ b).to_dense_matrix(4) - da @ db).max() < 1e-12
    assert np.abs(a.adjoint().to_dense_matrix(4) - da.conj().T).max() < 1e-12
    herm = a.hermitian_part().to_dense_matrix(4)
    assert np.abs(herm - herm.conj().T).max() < 1e-12
    assert np.abs(commutator(a, b).to_dense_matrix(4) - (da @ db - db @ da)).max() < 1e-12
    assert np.abs(anticommutator(a, b).to_dense_matrix(4) - (da @ db + db @ da)).max() < 1e-12


def test_sparse_and_apply_agree_with_dense():
    rng = np.random.default_rng(5)
    s = PauliSum.from_letters("X0 Y1", 0.3) + PauliSum.from_letters("Z2 X3", -1.2) + PauliSum.identity(0.7)
    v = rng.normal(size=16) + 1j * rng.normal(size=16)
    dense = s.to_dense_matrix(4)
    assert np.abs(s.to_sparse(4).toarray() - dense).max() < 1e-14
    assert np.abs(s.apply(v) - dense @ v).max() < 1e-12


def test_simplify_and_support_and_remap():
    s = PauliSum.from_letters("X0 Z3", 1.0) + PauliSum.from_letters("Y1", 1e-16)
    assert len(s.simplify(atol=1e-15)) == 1
    assert s.support() == {0, 1, 3}
    moved = s.remap({0: 2, 1: 0, 3: 1})
    assert moved.terms == PauliSum({(4, 2): 1.0, (1, 1): 1e-16}).terms


def test_text_round_trip_and_format():
    s = PauliSum.from_letters("X3 Z5 Y7", 0.1 + 0.2j) + PauliSum.identity(-1 / 3)
    text = s.to_text()
    assert "(1.0000000000000001e-01,2.0000000000000001e-01) X3 Z5 Y7" in text
    back = PauliSum.from_text(text)
    assert back.terms == s.terms
    with pytest.raises(InvalidParameter):
        PauliSum.from_text("nonsense")


def test_jw_mode_zero_has_empty_string():
    ordering, _ = small_system()
    create, annih = jw_fermion_ops(ordering.modes[0], ordering)
    assert np.allclose(create.to_dense_matrix(1), RAISE)
    assert np.allclose(annih.to_dense_matrix(1), LOWER)


def test_jw_matches_kron_oracle():
    ordering, _ = small_system()
    for k, mode in enumerate(ordering.fermion_modes):
        create, _ = jw_fermion_ops(mode, ordering)
        assert np.abs(create.to_dense_matrix(5) - fermion_create(k, 5)).max() == 0


def test_jw_sign_after_lower_mode_occupied():
    ordering, _ = small_system()
    c0, _ = jw_fermion_ops(ordering.modes[0], ordering)
    c1, _ = jw_fermion_ops(ordering.modes[1], ordering)
    vac = np.zeros(4)
    vac[0] = 1
    state = c1.to_dense_matrix(2) @ (c0.to_dense_matrix(2) @ vac)
    assert state[3] == -1.0


def test_fermion_anticommutators():
    ordering, _ = small_system()
    ops = {}
    for mode in ordering.fermion_modes:
        c, a = jw_fermion_ops(mode, ordering)
        ops[mode] = (c.to_dense_matrix(5), a.to_dense_matrix(5))
    eye = np.eye(32)
    for m1, (c1, a1) in ops.items():
        for m2, (c2, a2) in ops.items():
            assert np.abs(a1 @ c2 + c2 @ a1 - (eye if m1 == m2 else 0)).max() < 1e-12
            assert np.abs(a1 @ a2 + a2 @ a1).max() < 1e-12


def test_ghost_anticommutator_sign():
    ordering, _ = small_system()
    g = {k: v.to_dense_matrix(5) for k, v in ghost_field_ops(0, O, ordering).items()}
    eye = np.eye(32)
    assert np.abs(g["d"] @ g["e_dag"] + g["e_dag"] @ g["d"] + eye).max() < 1e-12
    assert np.abs(g["e"] @ g["d_dag"] + g["d_dag"] @ g["e"] + eye).max() < 1e-12
    for a, b in [("d", "d_dag"), ("e", "e_dag"), ("d", "e"), ("d_dag", "e_dag")]:
        assert np.abs(g[a] @ g[b] + g[b] @ g[a]).max() < 1e-12


def test_fermion_ops_reject_gluon():
    ordering, layout = small_system()
    with pytest.raises(InvalidParameter):
        jw_fermion_ops(ordering.boson_modes[0], ordering)
    with pytest.raises(InvalidParameter):
        jw_boson_ops(ordering.fermion_modes[0], layout)


@pytest.mark.parametrize("cutoff", [1, 2, 3])
def test_boson_ladder_on_unary_subspace(cutoff):
    ordering, layout = small_system(cutoff=cutoff, n_bosons=1)
    mode = ordering.boson_modes[0]
    block = layout.block_of(mode)
    n = layout.total_qubits
    create, annih = jw_boson_ops(mode, layout)
    dense_c = create.to_dense_matrix(n)
    assert np.abs(dense_c - boson_create(block, n)).max() < 1e-12
    idx = [unary_index(block, h) for h in range(cutoff + 1)]
    restricted = dense_c[np.ix_(idx, idx)]
    assert np.abs(restricted - truncated_raise(cutoff)).max() < 1e-12
    number = (create @ annih).to_dense_matrix(n)[np.ix_(idx, idx)]
    assert np.abs(number - np.diag(np.arange(cutoff + 1))).max() < 1e-12
    # truncated commutator [a, a^dagger] = diag(1, ..., 1, -cutoff)
    comm = commutator(annih, create).to_dense_matrix(n)[np.ix_(idx, idx)]
    assert np.abs(comm - np.diag([1.0] * cutoff + [-cutoff])).max() < 1e-12


def test_boson_ladder_edge_actions():
    ordering, layout = small_system(cutoff=2, n_bosons=1)
    mode = ordering.boson_modes[0]
    block = layout.block_of(mode)
    create, annih = (op.to_dense_matrix(layout.total_qubits) for op in jw_boson_ops(mode, layout))
    top = np.zeros(1 << layout.total_qubits)
    top[unary_index(block, 2)] = 1
    assert np.abs(create @ top).max() == 0
    bottom = np.zeros_like(top)
    bottom[unary_index(block, 0)] = 1
    assert np.abs(annih @ bottom).max() == 0
    one = np.zeros_like(top)
    one[unary_index(block, 1)] = 1
    assert (create @ one)[unary_index(block, 2)] == pytest.approx(np.sqrt(2))


def test_bosons_commute_with_fermions_and_each_other():
    ordering, layout = small_system(cutoff=1, n_bosons=2)
    b1, b2 = (jw_boson_ops(m, layout)[0] for m in ordering.boson_modes)
    f, _ = jw_fermion_ops(ordering.fermion_modes[3], ordering)
    assert len(commutator(b1, f).simplify(atol=1e-15)) == 0
    assert len(commutator(b1, b2.adjoint()).simplify(atol=1e-15)) == 0


def test_charges():
    ordering, layout = small_system()
    n = layout.total_qubits
    assert np.allclose(number_operator(2).to_dense_matrix(3), embed({2: np.diag([0, 1])}, 3))
    q = quark_charge(layout).to_dense_matrix(n).diagonal().real
    g = ghost_charge(layout).to_dense_matrix(n).diagonal().real
    k = np.arange(1 << n)
    assert np.allclose(q, (k & 1) + (k >> 1 & 1) - (k >> 2 & 1))
    assert np.allclose(g, (k >> 3 & 1) - (k >> 4 & 1))
    nb = gluon_number(layout).to_dense_matrix(n).diagonal().real
    assert np.allclose(nb, (k >> 6 & 1) + (k >> 8 & 1))


def test_z_is_diagonal_sign():
    assert np.allclose(Z, PauliSum.from_letters("Z0").to_dense_matrix(1))
