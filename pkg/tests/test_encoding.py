import json

import numpy as np
import pytest

from ymsim.encoding import (OccupationConfig, basis_index_to_occ, build_layout, occ_to_basis_index,
                            formula_qubit_count, parse_layout_json, unary_mask, valid_unary_subspace)
from ymsim.errors import CapacityError, InvalidConfig
from ymsim.lattice import Species, build_lattice, enumerate_modes
from ymsim.theory import ModelParams


def make_layout(n=2, cutoff=1, extent=1, pol=2, ghosts=False, limit=None):
    params = ModelParams(group_n=n, boson_cutoff=cutoff, polarization_count=pol, include_ghosts=ghosts)
    _, ordering = enumerate_modes(build_lattice(1.0, extent), params)
    return build_layout(ordering, params, qubit_limit=limit)


@pytest.mark.parametrize("n, ghosts, want", [(2, False, 20), (2, True, 26), (3, False, 44)])
def test_single_site_qubit_totals(n, ghosts, want):
    assert make_layout(n=n, ghosts=ghosts).total_qubits == want


def test_formula_for_random_tuples():
    rng = np.random.default_rng(3)
    for _ in range(10):
        n, cutoff, extent = int(rng.integers(2, 5)), int(rng.integers(1, 4)), int(rng.integers(1, 3))
        layout = make_layout(n=n, cutoff=cutoff, extent=extent)
        assert layout.total_qubits == formula_qubit_count(n, cutoff, extent ** 3)
        assert layout.total_qubits == (2 * (n * n - 1) * (cutoff + 1) + 4 * n) * extent ** 3


def test_blocks_disjoint_and_cover_register():
    layout = make_layout(n=2, cutoff=2, ghosts=True, pol=4)
    used = list(layout.fermion_qubits.values())
    for block in layout.boson_blocks.values():
        assert len(block) == 3 and list(block) == list(range(block[0], block[0] + 3))
        used += list(block)
    assert sorted(used) == list(range(layout.total_qubits))
    for mode, q in layout.fermion_qubits.items():
        assert q == layout.ordering.kappa(mode)


def test_capacity_error_keeps_layout():
    with pytest.raises(CapacityError) as err:
        make_layout(n=3, limit=26)
    assert err.value.layout.total_qubits == 44


def test_vacuum_index_sets_marker_zero_only():
    layout = make_layout(cutoff=2)
    vac = occ_to_basis_index(OccupationConfig.vacuum(layout), layout)
    assert vac == layout.vacuum_index()
    for q in layout.fermion_qubits.values():
        assert not vac >> q & 1
    for block in layout.boson_blocks.values():
        assert [vac >> q & 1 for q in block] == [1, 0, 0]


def test_single_quark_flips_one_bit():
    layout = make_layout()
    quark = layout.ordering.of_species(Species.QUARK)[1]
    cfg = OccupationConfig.vacuum(layout).with_occupation(quark, 1)
    diff = occ_to_basis_index(cfg, layout) ^ layout.vacuum_index()
    assert diff == 1 << layout.qubit_of(quark)


def test_full_boson_marker_at_last_position():
    layout = make_layout(cutoff=3)
    gluon = layout.ordering.of_species(Species.GLUON)[2]
    idx = occ_to_basis_index(OccupationConfig.vacuum(layout).with_occupation(gluon, 3), layout)
    block = layout.block_of(gluon)
    assert [idx >> q & 1 for q in block] == [0, 0, 0, 1]


def test_round_trip_random_configs():
    rng = np.random.default_rng(11)
    layout = make_layout(n=2, cutoff=2, ghosts=True)
    for _ in range(1000):
        bos = {m: int(rng.integers(0, 3)) for m in layout.boson_blocks}
        fer = {m: int(rng.integers(0, 2)) for m in layout.fermion_qubits}
        cfg = OccupationConfig(bos, fer)
        back = basis_index_to_occ(occ_to_basis_index(cfg, layout), layout)
        assert back.boson_occ == bos and back.fermion_occ == fer


@pytest.mark.parametrize("change", ["boson_high", "fermion_two", "missing"])
def test_invalid_configs(change):
    layout = make_layout()
    cfg = OccupationConfig.vacuum(layout)
    gluon = next(iter(layout.boson_blocks))
    quark = next(iter(layout.fermion_qubits))
    if change == "boson_high":
        cfg = cfg.with_occupation(gluon, 2)
    elif change == "fermion_two":
        cfg = cfg.with_occupation(quark, 2)
    else:
        cfg.boson_occ.pop(gluon)
    with pytest.raises(InvalidConfig):
        occ_to_basis_index(cfg, layout)


def test_valid_unary_predicate():
    layout = make_layout()
    valid = valid_unary_subspace(layout)
    vac = layout.vacuum_index()
    block = next(iter(layout.boson_blocks.values()))
    assert valid(vac)
    assert not valid(vac | 1 << block[1])  # two markers
    assert not valid(vac & ~(1 << block[0]))  # no marker
    with pytest.raises(InvalidConfig):
        basis_index_to_occ(vac | 1 << block[1], layout)


def test_unary_mask_counts():
    blocks = [(0, 1), (2, 3, 4)]
    mask = unary_mask(blocks, {q: q for q in range(5)}, 5)
    assert mask.sum() == 2 * 3


def test_layout_json_dump():
    layout = make_layout(cutoff=2)
    rows = parse_layout_json(layout.to_json())
    assert [r["qubit"] for r in rows] == list(range(layout.total_qubits))
    roles = {r["role"] for r in rows}
    assert roles == {"fermion", "marker_0", "marker_1", "marker_2"}
    assert json.loads(layout.to_json()) == rows
