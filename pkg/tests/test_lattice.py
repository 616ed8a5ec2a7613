import itertools

import numpy as np
import pytest

from ymsim.errors import InvalidParameter
from ymsim.lattice import (ModeKey, Species, build_lattice, enumerate_modes, momentum_conserving_quadruples,
                           momentum_conserving_triples, momentum_conserving_tuples)
from ymsim.theory import ModelParams


def test_single_site_lattice():
    lat = build_lattice(1.0, 1)
    assert lat.volume == 1 and lat.sites == ((0, 0, 0),)


def test_even_extent_window():
    lat = build_lattice(0.5, 2)
    assert lat.volume == 8
    assert set(lat.sites) == set(itertools.product((-1, 0), repeat=3))
    assert np.allclose(lat.momentum((-1, 0, -1)), [-0.5, 0, -0.5])


def test_odd_extent_contains_origin_and_is_lexicographic():
    lat = build_lattice(1.0, 3)
    assert lat.volume == 27 and (0, 0, 0) in lat.sites
    assert list(lat.sites) == sorted(lat.sites)
    assert len(set(lat.sites)) == 27


@pytest.mark.parametrize("spacing, extent", [(0.0, 1), (-1.0, 2), (1.0, 0), (1.0, 1.5)])
def test_build_lattice_rejects(spacing, extent):
    with pytest.raises(InvalidParameter):
        build_lattice(spacing, extent)


@pytest.mark.parametrize("n, pol, ghosts, extent", [(2, 2, False, 1), (3, 4, True, 1), (2, 2, True, 2)])
def test_mode_counts(n, pol, ghosts, extent):
    lat = build_lattice(1.0, extent)
    params = ModelParams(group_n=n, polarization_count=pol, include_ghosts=ghosts)
    modes, ordering = enumerate_modes(lat, params)
    v = lat.volume
    count = {sp: len(ordering.of_species(sp)) for sp in Species}
    assert count[Species.QUARK] == 2 * n * v
    assert count[Species.ANTIQUARK] == 2 * n * v
    assert count[Species.GLUON] == (n * n - 1) * pol * v
    assert count[Species.GHOST] + count[Species.ANTIGHOST] == (2 * (n * n - 1) * v if ghosts else 0)
    assert len(modes) == len(set(modes))


def test_su2_single_site_counts():
    _, ordering = enumerate_modes(build_lattice(1.0, 1), ModelParams(group_n=2))
    assert len(ordering.of_species(Species.QUARK)) == 4
    assert len(ordering.of_species(Species.ANTIQUARK)) == 4
    assert len(ordering.of_species(Species.GLUON)) == 6
    assert ordering.kappa(ordering.modes[0]) == 0


def test_kappa_round_trip_and_fermion_block():
    lat = build_lattice(1.0, 2)
    modes, ordering = enumerate_modes(lat, ModelParams(group_n=2, include_ghosts=True))
    for k, m in enumerate(modes):
        assert ordering.kappa(m) == k and ordering.mode(k) == m
    # fermionic modes first, in species order quark, antiquark, ghost, antighost
    order = [Species.QUARK, Species.ANTIQUARK, Species.GHOST, Species.ANTIGHOST]
    ranks = [order.index(m.species) for m in ordering.fermion_modes]
    assert ranks == sorted(ranks)
    assert all(m.species is Species.GLUON for m in ordering.boson_modes)
    quarks = ordering.of_species(Species.QUARK)
    assert [(m.site, m.color, m.index) for m in quarks] == sorted((m.site, m.color, m.index) for m in quarks)


def test_ordering_is_deterministic():
    a = enumerate_modes(build_lattice(1.0, 2), ModelParams(group_n=3))[0]
    b = enumerate_modes(build_lattice(1.0, 2), ModelParams(group_n=3))[0]
    assert a == b


def test_unknown_mode_raises():
    _, ordering = enumerate_modes(build_lattice(1.0, 1), ModelParams())
    with pytest.raises(InvalidParameter):
        ordering.kappa(ModeKey(Species.QUARK, (5, 5, 5), 0, 0))


def _brute(lat, signs):
    w = lat.window
    out = []
    for combo in itertools.product(lat.sites, repeat=len(signs)):
        total = [sum(s * site[ax] for s, site in zip(signs, combo)) for ax in range(3)]
        if total == [0, 0, 0]:
            out.append(combo)
    assert all(c in w for combo in out for site in combo for c in site)
    return sorted(out)


def test_single_site_tuples():
    lat = build_lattice(1.0, 1)
    assert momentum_conserving_triples(lat) == [((0, 0, 0),) * 3]
    assert momentum_conserving_quadruples(lat) == [((0, 0, 0),) * 4]


@pytest.mark.parametrize("extent", [1, 2, 3])
def test_triples_match_bruteforce(extent):
    lat = build_lattice(1.0, extent)
    assert sorted(momentum_conserving_triples(lat)) == _brute(lat, (1, -1, 1))


def test_quadruples_match_bruteforce():
    lat = build_lattice(1.0, 2)
    assert sorted(momentum_conserving_quadruples(lat)) == _brute(lat, (1, 1, -1, -1))


def test_tuples_reject_bad_signs():
    with pytest.raises(InvalidParameter):
        momentum_conserving_tuples(build_lattice(1.0, 1), (1, 2))
