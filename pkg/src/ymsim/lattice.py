"""Momentum lattice, second-quantized modes and their total ordering."""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameter
from .theory import ModelParams

Site = tuple[int, int, int]


@dataclass(frozen=True)
class MomentumLattice:
    """extent^3 integer sites in a window centred on the origin.

    Coordinates run over ``range(-(extent // 2), extent - extent // 2)`` on each
    axis; the physical momentum of a site is ``spacing * site``.
    """

    spacing_a: float
    extent_phat: int
    sites: tuple[Site, ...] = field(repr=False)

    @property
    def volume(self) -> int:
        return len(self.sites)

    @property
    def window(self) -> range:
        lo = -(self.extent_phat // 2)
        return range(lo, lo + self.extent_phat)

    def momentum(self, site: Site) -> np.ndarray:
        return self.spacing_a * np.asarray(site, dtype=float)

    def contains(self, site) -> bool:
        w = self.window
        return all(c in w for c in site)


def build_lattice(spacing: float, extent: int) -> MomentumLattice:
    if not spacing > 0:
        raise InvalidParameter(f"lattice spacing must be positive, got {spacing}")
    if int(extent) != extent or extent < 1:
        raise InvalidParameter(f"lattice extent must be an integer >= 1, got {extent}")
    extent = int(extent)
    lo = -(extent // 2)
    axis = range(lo, lo + extent)
    sites = tuple(itertools.product(axis, axis, axis))
    return MomentumLattice(spacing_a=float(spacing), extent_phat=extent, sites=sites)


class Species(str, enum.Enum):
    GLUON = "gluon"
    QUARK = "quark"
    ANTIQUARK = "antiquark"
    GHOST = "ghost"
    ANTIGHOST = "antighost"

    @property
    def fermionic(self) -> bool:
        return self is not Species.GLUON


# Frozen: JW signs depend on this order.
FERMION_SPECIES_ORDER = (Species.QUARK, Species.ANTIQUARK, Species.GHOST, Species.ANTIGHOST)


@dataclass(frozen=True)
class ModeKey:
    """One second-quantized mode.

    ``color`` is the fundamental colour for (anti)quarks and the adjoint colour
    for gluons and ghosts; ``index`` is the spin (quarks), the polarization
    label (gluons) or 0 (ghosts).
    """

    species: Species
    site: Site
    color: int
    index: int = 0

    def __str__(self) -> str:
        return f"{self.species.value}{self.site}c{self.color}i{self.index}"


@dataclass(frozen=True)
class ModeOrdering:
    """Bijection between modes and the integer primary key kappa.

    Fermionic modes take kappa = 0 .. n_fermion-1 in the order quarks,
    antiquarks, ghosts, antighosts (each lexicographic in site, colour, spin);
    gluon modes follow. Jordan-Wigner strings run over fermionic kappa only.
    """

    modes: tuple[ModeKey, ...]
    n_fermion: int
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_index", {m: k for k, m in enumerate(self.modes)})

    def kappa(self, mode: ModeKey) -> int:
        try:
            return self._index[mode]
        except KeyError:
            raise InvalidParameter(f"unknown mode {mode}") from None

    def mode(self, kappa: int) -> ModeKey:
        return self.modes[kappa]

    def __len__(self) -> int:
        return len(self.modes)

    def __contains__(self, mode) -> bool:
        return mode in self._index

    @property
    def fermion_modes(self) -> tuple[ModeKey, ...]:
        return self.modes[: self.n_fermion]

    @property
    def boson_modes(self) -> tuple[ModeKey, ...]:
        return self.modes[self.n_fermion:]

    def of_species(self, species: Species) -> list[ModeKey]:
        return [m for m in self.modes if m.species is species]


def enumerate_modes(lattice: MomentumLattice, params: ModelParams) -> tuple[list[ModeKey], ModeOrdering]:
    n = params.group_n
    adj = params.adjoint_dim
    per_species = {
        Species.QUARK: [(c, s) for c in range(n) for s in range(2)],
        Species.ANTIQUARK: [(c, s) for c in range(n) for s in range(2)],
        Species.GHOST: [(b, 0) for b in range(adj)],
        Species.ANTIGHOST: [(b, 0) for b in range(adj)],
    }
    species = FERMION_SPECIES_ORDER if params.include_ghosts else FERMION_SPECIES_ORDER[:2]
    modes = [ModeKey(sp, site, c, i)
             for sp in species
             for site in lattice.sites
             for c, i in per_species[sp]]
    n_fermion = len(modes)
    modes += [ModeKey(Species.GLUON, site, a, l)
              for site in lattice.sites
              for a in range(adj)
              for l in params.polarizations]
    ordering = ModeOrdering(modes=tuple(modes), n_fermion=n_fermion)
    return list(ordering.modes), ordering


def momentum_conserving_tuples(lattice: MomentumLattice, signs) -> list[tuple[Site, ...]]:
    """All site tuples with sum_k signs[k] * site_k == 0, exactly, inside the window.

    No wraparound: combinations whose closing momentum leaves the window are
    simply absent.
    """
    signs = tuple(int(s) for s in signs)
    if any(s not in (1, -1) for s in signs) or len(signs) < 2:
        raise InvalidParameter(f"signs must be a sequence of +-1, got {signs}")
    out = []
    last = signs[-1]
    for head in itertools.product(lattice.sites, repeat=len(signs) - 1):
        total = [sum(s * site[ax] for s, site in zip(signs, head)) for ax in range(3)]
        closing = tuple(-last * c for c in total)
        if lattice.contains(closing):
            out.append(head + (closing,))
    return out


def momentum_conserving_triples(lattice: MomentumLattice) -> list[tuple[Site, Site, Site]]:
    """Triples with p1 - p2 + p3 = 0."""
    return momentum_conserving_tuples(lattice, (1, -1, 1))


def momentum_conserving_quadruples(lattice: MomentumLattice) -> list[tuple[Site, Site, Site, Site]]:
    """Quadruples with p1 + p2 - p3 - p4 = 0."""
    return momentum_conserving_tuples(lattice, (1, 1, -1, -1))
