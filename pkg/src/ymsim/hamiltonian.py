"""Interaction-picture Hamiltonians as time-dependent Pauli sums.

Each vertex is expanded into frequency components. A leg of sign s = +1 is the
positive-frequency part of its field (annihilation, e^{-ip.x}) and s = -1 the
negative-frequency part. For a vertex with legs k the spatial integral gives
the Kronecker constraint sum_k s_k p_k = 0, the time phase is
e^{-i Omega t} with Omega = sum_k s_k omega_k, and a derivative on leg k
brings down -i s_k p_mu.

Every term is stored as a template: for each Pauli pattern P a short list of
(Omega, B) pairs, so that H(t) = sum_P P * Re(sum_Omega B e^{-i Omega t}).
Coefficients are therefore real at every t and each HamiltonianTerm is
Hermitian string by string.

Operators are kept in the order written in the interaction density (no normal
ordering); the Hermitian part is taken at the end.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .encoding import RegisterLayout
from .errors import ConfigurationError, InvalidParameter, NotCoveredError
from .lattice import (ModeKey, MomentumLattice, Species, momentum_conserving_tuples)
from .pauli import (ARRAY_QUBIT_LIMIT, PauliSum, array_product, jw_boson_ops,
                    jw_fermion_ops, pattern_key, to_arrays)
from .theory import (ModelParams, dirac_bar, dirac_spinor, fermion_omega, four_momentum,
                     gluon_omega, minkowski_dot, polarization_vector, slash, su_n_generators)


class TermLabel(str, enum.Enum):
    FI = "FI"
    G4I = "G4I"
    G3I = "G3I"
    FPI = "FPI"


# Product order of one Trotter step, leftmost factor acts last.
TROTTER_ORDER = (TermLabel.FI, TermLabel.G4I, TermLabel.G3I, TermLabel.FPI)

# Sub-structures that can be selected on their own. They live in the Trotter
# slot of their parent term.
SUBSTRUCTURES = {"H1": TermLabel.FI, "H2": TermLabel.G4I}

_ZERO = 1e-13  # relative size below which a c-number vertex factor is a rounding zero
_OMEGA_DECIMALS = 10


def measure_factor(spacing: float, omegas) -> float:
    """a^{3k} / ((2 pi)^{3(k-1)} sqrt(2^k prod omega)) for a k-leg vertex.

    Each field carries a^3/(2 pi)^3 and 1/sqrt(2 omega); the spatial integral
    turns one (2 pi)^3 delta into a Kronecker delta.
    """
    k = len(omegas)
    prod = float(np.prod(omegas))
    if not prod > 0:
        raise InvalidParameter("measure factor needs positive energies")
    return spacing ** (3 * k) / ((2 * math.pi) ** (3 * (k - 1)) * math.sqrt(2.0**k * prod))


@dataclass(frozen=True)
class CoefficientBundle:
    measure_factor: float
    coupling_power: float
    phase_time: float


@dataclass(frozen=True)
class Leg:
    """One field factor of a vertex: which field, which frequency part, which mode.

    ``mode`` is the mode the leg's operator acts on: for the negative-frequency
    part of psi it is the antiquark mode, for psi-bar's positive part too.
    """

    field: str  # "A", "psi", "psibar", "c", "cbar"
    sign: int
    mode: ModeKey

    def to_json(self, layout: RegisterLayout) -> dict:
        return {"field": self.field, "sign": self.sign, "kappa": layout.ordering.kappa(self.mode),
                "species": self.mode.species.value, "site": list(self.mode.site),
                "color": self.mode.color, "index": self.mode.index}


@dataclass(frozen=True)
class VertexRecord:
    """Provenance of one vertex combination: coefficient at t is coeff * e^{-i omega t}."""

    label: str
    legs: tuple[Leg, ...]
    coeff: complex
    omega: float

    def coefficient(self, t: float) -> complex:
        return self.coeff * np.exp(-1j * self.omega * t)

    def momentum_balance(self) -> tuple[int, int, int]:
        return tuple(sum(leg.sign * leg.mode.site[ax] for leg in self.legs) for ax in range(3))


# ---------------------------------------------------------------------------
# leg operators


def _fermion_leg_mode(field: str, sign: int, site, color: int, index: int) -> ModeKey:
    species = {
        ("psi", 1): Species.QUARK, ("psi", -1): Species.ANTIQUARK,
        ("psibar", 1): Species.ANTIQUARK, ("psibar", -1): Species.QUARK,
        ("c", 1): Species.GHOST, ("c", -1): Species.ANTIGHOST,
        ("cbar", 1): Species.ANTIGHOST, ("cbar", -1): Species.GHOST,
    }[(field, sign)]
    return ModeKey(species, tuple(site), color, index)


def leg_operator(leg: Leg, layout: RegisterLayout) -> PauliSum:
    create = leg.sign < 0
    if leg.field == "A":
        c, a = jw_boson_ops(leg.mode, layout)
        return c if create else a
    c, a = jw_fermion_ops(leg.mode, layout.ordering)
    if leg.field == "c" and create:
        # the antighost creation part of c carries the ghost-sector minus sign
        return -c
    return c if create else a


class _LegCache:
    def __init__(self, layout: RegisterLayout):
        self.layout = layout
        self.sums: dict = {}
        self.arrays: dict = {}

    def sum(self, leg: Leg) -> PauliSum:
        if leg not in self.sums:
            self.sums[leg] = leg_operator(leg, self.layout)
        return self.sums[leg]

    def array(self, leg: Leg):
        if leg not in self.arrays:
            self.arrays[leg] = to_arrays(self.sum(leg))
        return self.arrays[leg]


def vertex_operator(legs, layout: RegisterLayout, cache: _LegCache | None = None) -> PauliSum:
    """Ordered product of the leg operators through the generic JW path."""
    cache = cache or _LegCache(layout)
    out = PauliSum.identity()
    for leg in legs:
        out = out @ cache.sum(leg)
    return out


# ---------------------------------------------------------------------------
# templates


@dataclass
class HamiltonianTemplate:
    label: str
    n_qubits: int
    xs: list
    zs: list
    omegas: np.ndarray  # (K,)
    amplitudes: np.ndarray  # (n_patterns, K)
    records: list = field(repr=False, default_factory=list)

    def __len__(self) -> int:
        return len(self.xs)

    def coefficients(self, t: float) -> np.ndarray:
        if not len(self.xs):
            return np.zeros(0)
        return (self.amplitudes @ np.exp(-1j * self.omegas * t)).real

    def at(self, t: float) -> PauliSum:
        out = PauliSum()
        out.terms = {(x, z): complex(c) for x, z, c in zip(self.xs, self.zs, self.coefficients(t))}
        return out

    def support(self) -> set[int]:
        bits = 0
        for x, z in zip(self.xs, self.zs):
            bits |= x | z
        return {q for q in range(bits.bit_length()) if bits >> q & 1}

    def is_time_independent(self) -> bool:
        return not len(self.omegas) or bool(np.all(np.abs(self.omegas) < 1e-12))


class _Accumulator:
    """Sums (pattern, frequency) -> amplitude over many vertex products."""

    CHUNK = 2_000_000

    def __init__(self, n_qubits: int):
        self.vector = n_qubits <= ARRAY_QUBIT_LIMIT
        self.chunks: list = []
        self.pending = 0
        self.table: dict = {}

    def add_arrays(self, x, z, col: int, c):
        self.chunks.append((x, z, np.full(x.shape, col, dtype=np.int64), c))
        self.pending += len(x)
        if self.pending > self.CHUNK:
            self._reduce()

    def add_sum(self, ps: PauliSum, col: int, scale: complex):
        for key, c in ps.terms.items():
            k = (key[0], key[1], col)
            self.table[k] = self.table.get(k, 0.0) + c * scale

    def _reduce(self):
        if not self.chunks:
            return
        x, z, col, c = (np.concatenate(parts) for parts in zip(*self.chunks))
        order = np.lexsort((col, z, x))
        x, z, col, c = x[order], z[order], col[order], c[order]
        start = np.ones(len(x), dtype=bool)
        start[1:] = (x[1:] != x[:-1]) | (z[1:] != z[:-1]) | (col[1:] != col[:-1])
        idx = np.flatnonzero(start)
        self.chunks = [(x[idx], z[idx], col[idx], np.add.reduceat(c, idx))]
        self.pending = len(idx)

    def items(self):
        if self.vector:
            self._reduce()
            if not self.chunks:
                return [], [], np.zeros(0, dtype=np.int64), np.zeros(0, dtype=complex)
            x, z, col, c = self.chunks[0]
            return [int(v) for v in x], [int(v) for v in z], col, c
        keys = list(self.table)
        return ([k[0] for k in keys], [k[1] for k in keys],
                np.array([k[2] for k in keys], dtype=np.int64),
                np.array([self.table[k] for k in keys], dtype=complex))


def assemble_template(label: str, records: list, layout: RegisterLayout, scale: float = 1.0) -> HamiltonianTemplate:
    """Turn vertex records into a template with H(t) = Re(scale * sum coeff e^{-i omega t} legs).

    ``scale`` is 2 when the records list only one half of a (term + H.c.) pair
    and 1 when the records already cover the full Hermitian combination.
    """
    n_qubits = layout.total_qubits
    omega_keys: dict = {}
    grouped: dict = {}
    for rec in records:
        key = round(rec.omega, _OMEGA_DECIMALS)
        col = omega_keys.setdefault(key, len(omega_keys))
        slot = grouped.setdefault(rec.legs, {})
        slot[col] = slot.get(col, 0.0) + rec.coeff
    omegas = np.array(list(omega_keys), dtype=float)
    acc = _Accumulator(n_qubits)
    cache = _LegCache(layout)
    for legs, per_col in grouped.items():
        if acc.vector:
            table = cache.array(legs[0])
            for leg in legs[1:]:
                table = array_product(table, cache.array(leg))
            x, z, c = table
            for col, coeff in per_col.items():
                acc.add_arrays(x, z, col, c * (coeff * scale))
        else:
            op = vertex_operator(legs, layout, cache)
            for col, coeff in per_col.items():
                acc.add_sum(op, col, coeff * scale)
    xs, zs, cols, amps = acc.items()
    # collect per pattern
    index: dict = {}
    rows = []
    for x, z in zip(xs, zs):
        key = (x, z)
        if key not in index:
            index[key] = len(rows)
            rows.append(key)
    matrix = np.zeros((len(rows), len(omegas)), dtype=complex)
    if len(rows):
        row_idx = np.fromiter((index[(x, z)] for x, z in zip(xs, zs)), dtype=np.int64, count=len(xs))
        np.add.at(matrix, (row_idx, cols), amps)
    # time-independent columns only ever contribute their real part
    static = np.abs(omegas) < 1e-12
    matrix[:, static] = matrix[:, static].real
    peak = np.abs(matrix).max() if matrix.size else 0.0
    keep = np.abs(matrix).max(axis=1) > _ZERO * peak if matrix.size else np.zeros(0, dtype=bool)
    rows = [r for r, k in zip(rows, keep) if k]
    matrix = matrix[keep]
    order = sorted(range(len(rows)), key=lambda i: pattern_key(*rows[i]))
    rows = [rows[i] for i in order]
    matrix = matrix[order] if len(order) else matrix
    return HamiltonianTemplate(label=label, n_qubits=n_qubits, xs=[r[0] for r in rows],
                               zs=[r[1] for r in rows], omegas=omegas, amplitudes=matrix,
                               records=records)


# ---------------------------------------------------------------------------
# vertex enumeration


def _tilde(eps: np.ndarray, sign: int) -> np.ndarray:
    return eps if sign > 0 else eps.conj()


def _small(value: complex, scale: float) -> bool:
    return abs(value) <= _ZERO * scale


def _gluon_data(lattice, params, site):
    k = lattice.momentum(site)
    w = gluon_omega(k, params)
    eps = {l: polarization_vector(k, l, params.polarization_count) for l in params.polarizations}
    return k, w, eps


FI_STRUCTURES = ((1, 1), (1, -1), (-1, 1), (-1, -1))  # (psibar sign, psi sign), gluon leg always +
H1_STRUCTURE = ((-1, 1),)


def fi_records(params: ModelParams, lattice: MomentumLattice, structures=FI_STRUCTURES) -> list[VertexRecord]:
    """-g A^+ psibar gamma t psi vertex records (the H.c. half is implied)."""
    g = params.coupling_g
    if g == 0:
        return []
    n = params.group_n
    gens = su_n_generators(n).generators
    m = params.fermion_mass_m
    colors = [(a, i, j) for a in range(params.adjoint_dim) for i in range(n) for j in range(n)
              if gens[a, i, j] != 0]
    records = []
    for sb, sp in structures:
        for p1, p2, p3 in momentum_conserving_tuples(lattice, (1, sb, sp)):
            k1, w1, eps = _gluon_data(lattice, params, p1)
            k2, k3 = lattice.momentum(p2), lattice.momentum(p3)
            w2, w3 = fermion_omega(k2, params), fermion_omega(k3, params)
            meas = measure_factor(lattice.spacing_a, (w1, w2, w3))
            omega_sum = w1 + sb * w2 + sp * w3
            bars = [dirac_bar(dirac_spinor(k2, m, r, "antiparticle" if sb > 0 else "particle")) for r in (0, 1)]
            kets = [dirac_spinor(k3, m, s, "particle" if sp > 0 else "antiparticle") for s in (0, 1)]
            scale = 2.0 * math.sqrt(w2 * w3)
            for l in params.polarizations:
                sl = slash(eps[l])
                for r in (0, 1):
                    for s in (0, 1):
                        bil = complex(bars[r] @ sl @ kets[s])
                        if _small(bil, scale):
                            continue
                        for a, i, j in colors:
                            coeff = -g * meas * bil * gens[a, i, j]
                            legs = (Leg("A", 1, ModeKey(Species.GLUON, p1, a, l)),
                                    Leg("psibar", sb, _fermion_leg_mode("psibar", sb, p2, i, r)),
                                    Leg("psi", sp, _fermion_leg_mode("psi", sp, p3, j, s)))
                            records.append(VertexRecord(TermLabel.FI.value, legs, complex(coeff), omega_sum))
    return records


def _signs(k: int):
    for bits in range(1 << k):
        yield tuple(1 if not (bits >> (k - 1 - i)) & 1 else -1 for i in range(k))


def g3i_records(params: ModelParams, lattice: MomentumLattice) -> list[VertexRecord]:
    """g f^{abc} (d_mu A^a_nu) A^{mu b} A^{nu c}, all eight frequency partitions."""
    g = params.coupling_g
    if g == 0:
        return []
    f = su_n_generators(params.group_n).structure_constants
    colors = [(int(a), int(b), int(c)) for a, b, c in zip(*np.nonzero(f))]
    pols = params.polarizations
    records = []
    for signs in _signs(3):
        for sites in momentum_conserving_tuples(lattice, signs):
            data = [_gluon_data(lattice, params, s) for s in sites]
            ws = [d[1] for d in data]
            meas = measure_factor(lattice.spacing_a, ws)
            omega_sum = sum(s * w for s, w in zip(signs, ws))
            p1 = four_momentum(data[0][0], ws[0])
            for l1 in pols:
                e1 = _tilde(data[0][2][l1], signs[0])
                for l2 in pols:
                    e2 = _tilde(data[1][2][l2], signs[1])
                    deriv = -1j * signs[0] * minkowski_dot(p1, e2)
                    if _small(deriv, max(1.0, ws[0])):
                        continue
                    for l3 in pols:
                        e3 = _tilde(data[2][2][l3], signs[2])
                        dot13 = minkowski_dot(e1, e3)
                        if _small(dot13, 1.0):
                            continue
                        base = g * meas * deriv * dot13
                        for a, b, c in colors:
                            legs = tuple(Leg("A", s, ModeKey(Species.GLUON, site, col, l))
                                         for s, site, col, l in zip(signs, sites, (a, b, c), (l1, l2, l3)))
                            records.append(VertexRecord(TermLabel.G3I.value, legs,
                                                        complex(base * f[a, b, c]), omega_sum))
    return records


def _ff(n: int) -> np.ndarray:
    f = su_n_generators(n).structure_constants
    ff = np.einsum("eab,ecd->abcd", f, f)
    ff[np.abs(ff) < 1e-14] = 0.0
    return ff


G4I_PARTITIONS = tuple(_signs(4))
H2_PARTITION = ((1, 1, -1, -1),)


def g4i_records(params: ModelParams, lattice: MomentumLattice, partitions=G4I_PARTITIONS) -> list[VertexRecord]:
    """(g^2/4) f^{eab} f^{ecd} A^a_mu A^b_nu A^{mu c} A^{nu d} over the given frequency partitions."""
    g = params.coupling_g
    if g == 0:
        return []
    ff = _ff(params.group_n)
    colors = [tuple(int(v) for v in idx) for idx in zip(*np.nonzero(ff))]
    pols = params.polarizations
    records = []
    for signs in partitions:
        for sites in momentum_conserving_tuples(lattice, signs):
            data = [_gluon_data(lattice, params, s) for s in sites]
            ws = [d[1] for d in data]
            meas = measure_factor(lattice.spacing_a, ws)
            omega_sum = sum(s * w for s, w in zip(signs, ws))
            eps = [{l: _tilde(d[2][l], s) for l in pols} for d, s in zip(data, signs)]
            for l1 in pols:
                for l3 in pols:
                    d13 = minkowski_dot(eps[0][l1], eps[2][l3])
                    if _small(d13, 1.0):
                        continue
                    for l2 in pols:
                        for l4 in pols:
                            d24 = minkowski_dot(eps[1][l2], eps[3][l4])
                            if _small(d24, 1.0):
                                continue
                            base = 0.25 * g * g * meas * d13 * d24
                            ls = (l1, l2, l3, l4)
                            for cols in colors:
                                legs = tuple(Leg("A", s, ModeKey(Species.GLUON, site, col, l))
                                             for s, site, col, l in zip(signs, sites, cols, ls))
                                records.append(VertexRecord(TermLabel.G4I.value, legs,
                                                            complex(base * ff[cols]), omega_sum))
    return records


def fpi_records(params: ModelParams, lattice: MomentumLattice) -> list[VertexRecord]:
    """-g f^{abc} (d^mu cbar^a) A^b_mu c^c, all eight frequency partitions."""
    if not params.include_ghosts:
        raise ConfigurationError("the ghost-gluon term needs include_ghosts=True")
    g = params.coupling_g
    if g == 0:
        return []
    f = su_n_generators(params.group_n).structure_constants
    colors = [(int(a), int(b), int(c)) for a, b, c in zip(*np.nonzero(f))]
    records = []
    for signs in _signs(3):
        for p1, p2, p3 in momentum_conserving_tuples(lattice, signs):
            k1, k3 = lattice.momentum(p1), lattice.momentum(p3)
            w1, w3 = gluon_omega(k1, params), gluon_omega(k3, params)
            _, w2, eps = _gluon_data(lattice, params, p2)
            meas = measure_factor(lattice.spacing_a, (w1, w2, w3))
            omega_sum = signs[0] * w1 + signs[1] * w2 + signs[2] * w3
            q1 = four_momentum(k1, w1)
            for l in params.polarizations:
                deriv = -1j * signs[0] * minkowski_dot(q1, _tilde(eps[l], signs[1]))
                if _small(deriv, max(1.0, w1)):
                    continue
                base = -g * meas * deriv
                for a, b, c in colors:
                    legs = (Leg("cbar", signs[0], _fermion_leg_mode("cbar", signs[0], p1, a, 0)),
                            Leg("A", signs[1], ModeKey(Species.GLUON, p2, b, l)),
                            Leg("c", signs[2], _fermion_leg_mode("c", signs[2], p3, c, 0)))
                    records.append(VertexRecord(TermLabel.FPI.value, legs, complex(base * f[a, b, c]), omega_sum))
    return records


# ---------------------------------------------------------------------------
# public builders


@dataclass
class HamiltonianTerm:
    label: str
    time_t: float
    pauli: PauliSum
    provenance: list = field(repr=False, default_factory=list)


def _check_layout(params: ModelParams, layout: RegisterLayout):
    if layout.cutoff != params.boson_cutoff:
        raise ConfigurationError("layout cutoff differs from the model cutoff")


def build_template(label: str, params: ModelParams, lattice: MomentumLattice,
                   layout: RegisterLayout) -> HamiltonianTemplate:
    """Template for a term label (FI, G4I, G3I, FPI) or a sub-structure (H1, H2)."""
    _check_layout(params, layout)
    label = label.value if isinstance(label, TermLabel) else str(label).upper()
    if label == "FI":
        return assemble_template(label, fi_records(params, lattice), layout, scale=2.0)
    if label == "H1":
        return assemble_template(label, fi_records(params, lattice, H1_STRUCTURE), layout, scale=2.0)
    if label == "G3I":
        return assemble_template(label, g3i_records(params, lattice), layout)
    if label == "G4I":
        return assemble_template(label, g4i_records(params, lattice), layout)
    if label == "H2":
        return assemble_template(label, g4i_records(params, lattice, H2_PARTITION), layout)
    if label == "FPI":
        return assemble_template(label, fpi_records(params, lattice), layout)
    raise InvalidParameter(f"unknown term label {label!r}")


def _term(label, params, lattice, layout, t) -> HamiltonianTerm:
    tpl = build_template(label, params, lattice, layout)
    return HamiltonianTerm(label=tpl.label, time_t=t, pauli=tpl.at(t), provenance=tpl.records)


def build_h1(params, lattice, layout, t: float = 0.0, method: str = "jw") -> HamiltonianTerm:
    """The A^+ psibar^- psi^+ structure and its conjugate.

    ``method="closed"`` assembles it from the explicit Pauli decomposition
    wherever that decomposition applies, and from the generic path elsewhere.
    """
    if method == "jw":
        return _term("H1", params, lattice, layout, t)
    if method != "closed":
        raise InvalidParameter(f"unknown method {method!r}")
    _check_layout(params, layout)
    records = fi_records(params, lattice, H1_STRUCTURE)
    total = PauliSum()
    cache = _LegCache(layout)
    kappa = layout.ordering.kappa
    for rec in records:
        gluon, out, inn = (leg.mode for leg in rec.legs)
        w = rec.coefficient(t)
        if kappa(out) < kappa(inn):
            total += build_i1_closed_form(gluon, out, inn, w, layout)
        else:
            op = vertex_operator(rec.legs, layout, cache) * w
            total += op + op.adjoint()
    return HamiltonianTerm("H1", t, total.hermitian_part().simplify(), records)


def build_h_fi(params, lattice, layout, t: float = 0.0) -> HamiltonianTerm:
    return _term("FI", params, lattice, layout, t)


def build_h_g3i(params, lattice, layout, t: float = 0.0) -> HamiltonianTerm:
    return _term("G3I", params, lattice, layout, t)


def build_h_g4i(params, lattice, layout, t: float = 0.0) -> HamiltonianTerm:
    return _term("G4I", params, lattice, layout, t)


def build_h_fpi(params, lattice, layout, t: float = 0.0) -> HamiltonianTerm:
    return _term("FPI", params, lattice, layout, t)


def parse_term_filter(selection) -> tuple[str, ...]:
    """Normalize a filter like "FI,G3I" or ["H1"] to labels in Trotter order."""
    if selection is None:
        return tuple(l.value for l in TROTTER_ORDER)
    if isinstance(selection, str):
        selection = [s for s in selection.replace(" ", "").split(",") if s]
    labels = [s.value if isinstance(s, TermLabel) else str(s).upper() for s in selection]
    known = {l.value for l in TROTTER_ORDER} | set(SUBSTRUCTURES)
    for lab in labels:
        if lab not in known:
            raise InvalidParameter(f"unknown term {lab!r}; choose from {sorted(known)}")
    slots = [SUBSTRUCTURES.get(l, l) for l in labels]
    slots = [s.value if isinstance(s, TermLabel) else s for s in slots]
    if len(set(slots)) != len(slots):
        raise InvalidParameter(f"term filter {labels} selects the same Trotter factor twice")
    order = [l.value for l in TROTTER_ORDER]
    return tuple(sorted(labels, key=lambda lab: order.index(slots[labels.index(lab)])))


def build_templates(params, lattice, layout, terms=None) -> list[HamiltonianTemplate]:
    labels = parse_term_filter(terms)
    if not params.include_ghosts:
        if terms is None:
            labels = tuple(l for l in labels if l != "FPI")
        elif "FPI" in labels:
            raise ConfigurationError("the FPI term needs include_ghosts=True")
    return [build_template(lab, params, lattice, layout) for lab in labels]


def build_h_total(params, lattice, layout, t: float = 0.0, terms=None) -> list[HamiltonianTerm]:
    """Terms in the order FI, G4I, G3I, FPI; FPI is left out without ghosts unless requested."""
    return [HamiltonianTerm(tpl.label, t, tpl.at(t), tpl.records)
            for tpl in build_templates(params, lattice, layout, terms)]


def audit_momentum(records) -> list[VertexRecord]:
    """Records whose legs violate sum s_k p_k = 0; empty when the build is sound."""
    return [rec for rec in records if rec.momentum_balance() != (0, 0, 0)]


# ---------------------------------------------------------------------------
# explicit Pauli decompositions
#
# Written in the register's own bit convention (|1> = occupied, marker bit
# set at the occupied block position). With P = XX + YY and M = XY - YX on a
# qubit pair (first letter on the lower qubit), the boson lowering operator
# on block positions (h, h+1) is sqrt(h+1) (P + iM)/4 and, for JW modes
# kappa2 < kappa3, b2^dagger b3 = (P + iM)/4 on (kappa2, kappa3) with a Z on
# every fermion qubit strictly in between.


def _pm(q0: int, q1: int) -> tuple[PauliSum, PauliSum]:
    b0, b1 = 1 << q0, 1 << q1
    p = PauliSum({(b0 | b1, 0): 1.0, (b0 | b1, b0 | b1): 1.0})
    m = PauliSum({(b0 | b1, b1): 1.0, (b0 | b1, b0): -1.0})
    return p, m


def build_i1_closed_form(gluon: ModeKey, quark_out: ModeKey, quark_in: ModeKey, w: complex,
                         layout: RegisterLayout) -> PauliSum:
    """Explicit Pauli form of a b_out^dagger b_in W + H.c. for kappa(out) < kappa(in).

    I1 = 1/8 sum_h sqrt(h+1) [P_b (P_f W1 - M_f W2) - M_b (M_f W1 + P_f W2)] Z...Z
    """
    kappa = layout.ordering.kappa
    k2, k3 = kappa(quark_out), kappa(quark_in)
    if not k2 < k3:
        raise NotCoveredError(f"explicit form needs kappa(out)={k2} < kappa(in)={k3}")
    if quark_out.species is not Species.QUARK or quark_in.species is not Species.QUARK:
        raise InvalidParameter("explicit form is for quark scattering legs")
    w1, w2 = w.real, w.imag
    pf, mf = _pm(k2, k3)
    zstring = PauliSum({(0, sum(1 << q for q in range(k2 + 1, k3))): 1.0})
    fa = (pf * w1 - mf * w2) @ zstring
    fb = (mf * w1 + pf * w2) @ zstring
    block = layout.block_of(gluon)
    out = PauliSum()
    for h in range(layout.cutoff):
        pb, mb = _pm(block[h], block[h + 1])
        out += (math.sqrt(h + 1) / 8.0) * (pb @ fa - mb @ fb)
    return out.simplify()


def i1_generic(gluon: ModeKey, quark_out: ModeKey, quark_in: ModeKey, w: complex,
               layout: RegisterLayout) -> PauliSum:
    """Same operator through the generic JW products."""
    legs = (Leg("A", 1, gluon), Leg("psibar", -1, quark_out), Leg("psi", 1, quark_in))
    op = vertex_operator(legs, layout) * w
    return (op + op.adjoint()).simplify()


def _number_pair(block, h: int) -> PauliSum:
    # marker at h after the raise-lower round trip: n_h (1 - n_{h+1})
    b0, b1 = 1 << block[h], 1 << block[h + 1]
    lo = PauliSum({(0, 0): 0.5, (0, b0): -0.5})
    hi = PauliSum({(0, 0): 0.5, (0, b1): 0.5})
    return lo @ hi


def lower_raise_closed_form(mode: ModeKey, layout: RegisterLayout) -> PauliSum:
    """a a^dagger on one gluon block, in explicit Pauli form."""
    block = layout.block_of(mode)
    cut = layout.cutoff
    out = PauliSum()
    for h1 in range(cut):
        p1, m1 = _pm(block[h1], block[h1 + 1])
        for h2 in range(cut):
            if h1 == h2:
                continue
            p2, m2 = _pm(block[h2], block[h2 + 1])
            out += (math.sqrt((h1 + 1) * (h2 + 1)) / 16.0) * (p1 @ p2 + m1 @ m2)
    for h in range(cut):
        out += (h + 1) * _number_pair(block, h)
    return out.simplify(atol=1e-15)


def i2_generic(modes, w: complex, layout: RegisterLayout) -> PauliSum:
    """1/2 (a1 a2 a3^dagger a4^dagger W + H.c.) through the generic JW products."""
    legs = tuple(Leg("A", s, m) for s, m in zip((1, 1, -1, -1), modes))
    op = vertex_operator(legs, layout) * w
    return ((op + op.adjoint()) * 0.5).simplify()


def i2_case(modes) -> str:
    m1, m2, m3, m4 = modes
    if (m1 == m3 and m2 == m4 and m1 != m2) or (m1 == m4 and m2 == m3 and m1 != m2):
        return "coincident"
    if len({m1, m2, m3, m4}) == 4:
        return "distinct"
    return "other"


def build_i2_closed_form(modes, w: complex, layout: RegisterLayout) -> PauliSum:
    """Explicit Pauli form of 1/2 (a1 a2 a3^dagger a4^dagger W + H.c.).

    Coincident pairs give (a a^dagger)_x (a a^dagger)_y Re W. Four distinct
    modes give 1/256 sum_h sqrt(prod(h+1)) [(O1 O3 - O2 O4) W3 - (O2 O3 + O1 O4) W4]
    with O1 + i O2 = (P1 + iM1)(P2 + iM2) and O3 + i O4 = (P3 - iM3)(P4 - iM4).
    """
    case = i2_case(modes)
    w3, w4 = w.real, w.imag
    if case == "coincident":
        m1, m2 = modes[0], modes[1]
        return ((lower_raise_closed_form(m1, layout) @ lower_raise_closed_form(m2, layout)) * w3).simplify()
    if case != "distinct":
        raise NotCoveredError(f"no explicit form for repeated modes {modes}")
    cut = layout.cutoff
    blocks = [layout.block_of(m) for m in modes]

    def pms(block):
        return [(math.sqrt(h + 1), *_pm(block[h], block[h + 1])) for h in range(cut)]

    out = PauliSum()
    for r1, p1, m1 in pms(blocks[0]):
        for r2, p2, m2 in pms(blocks[1]):
            o1 = p1 @ p2 - m1 @ m2
            o2 = m1 @ p2 + p1 @ m2
            for r3, p3, m3 in pms(blocks[2]):
                for r4, p4, m4 in pms(blocks[3]):
                    o3 = p3 @ p4 - m3 @ m4
                    o4 = -(m3 @ p4 + p3 @ m4)
                    weight = r1 * r2 * r3 * r4 / 256.0
                    out += weight * ((o1 @ o3 - o2 @ o4) * w3 - (o2 @ o3 + o1 @ o4) * w4)
    return out.simplify()
