"""Qubit register layout and occupation <-> basis-index arithmetic.

Fermionic modes get one qubit each, at qubit index == kappa; bit value equals
the occupation. Every gluon mode gets a one-hot block of cutoff+1 qubits where
occupation h is marked by a set bit at block position h. The vacuum is
therefore not the all-zero index: each gluon block carries its marker at
position 0.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import CapacityError, InvalidConfig, InvalidParameter
from .lattice import ModeKey, ModeOrdering, Species
from .theory import ModelParams

DEFAULT_QUBIT_LIMIT = 26


@dataclass(frozen=True)
class RegisterLayout:
    ordering: ModeOrdering
    cutoff: int
    fermion_qubits: dict = field(repr=False)  # ModeKey -> qubit
    boson_blocks: dict = field(repr=False)  # ModeKey -> tuple of qubits
    total_qubits: int

    def qubit_of(self, mode: ModeKey) -> int:
        return self.fermion_qubits[mode]

    def block_of(self, mode: ModeKey) -> tuple[int, ...]:
        return self.boson_blocks[mode]

    def qubit_roles(self) -> list[dict]:
        """One record per qubit: {qubit, mode_kappa, role}."""
        rows = []
        for mode, q in self.fermion_qubits.items():
            rows.append({"qubit": q, "mode_kappa": self.ordering.kappa(mode), "role": "fermion"})
        for mode, block in self.boson_blocks.items():
            kappa = self.ordering.kappa(mode)
            for h, q in enumerate(block):
                rows.append({"qubit": q, "mode_kappa": kappa, "role": f"marker_{h}"})
        rows.sort(key=lambda r: r["qubit"])
        return rows

    def to_json(self) -> str:
        return json.dumps(self.qubit_roles(), indent=1)

    def vacuum_index(self) -> int:
        return sum(1 << block[0] for block in self.boson_blocks.values())

    def check_capacity(self, limit: int = DEFAULT_QUBIT_LIMIT) -> None:
        if self.total_qubits > limit:
            raise CapacityError(
                f"layout needs {self.total_qubits} qubits, above the dense limit {limit}; "
                "use a term filter or count-only mode",
                layout=self,
            )


def build_layout(ordering: ModeOrdering, params: ModelParams, qubit_limit: int | None = None) -> RegisterLayout:
    """Assign qubits: fermions first (qubit = kappa), then gluon blocks in kappa order.

    With ``qubit_limit`` set, a larger register raises ``CapacityError`` that
    carries the finished layout.
    """
    cutoff = params.boson_cutoff
    fermion_qubits = {m: ordering.kappa(m) for m in ordering.fermion_modes}
    nxt = len(fermion_qubits)
    blocks = {}
    for m in ordering.boson_modes:
        blocks[m] = tuple(range(nxt, nxt + cutoff + 1))
        nxt += cutoff + 1
    layout = RegisterLayout(ordering=ordering, cutoff=cutoff, fermion_qubits=fermion_qubits,
                            boson_blocks=blocks, total_qubits=nxt)
    if qubit_limit is not None:
        layout.check_capacity(qubit_limit)
    return layout


def formula_qubit_count(n: int, cutoff: int, volume: int) -> int:
    """[2(N^2-1)(cutoff+1) + 4N] * volume: two polarizations, no ghosts."""
    return (2 * (n * n - 1) * (cutoff + 1) + 4 * n) * volume


@dataclass
class OccupationConfig:
    boson_occ: dict  # ModeKey -> 0..cutoff
    fermion_occ: dict  # ModeKey -> 0/1

    @classmethod
    def vacuum(cls, layout: RegisterLayout) -> "OccupationConfig":
        return cls({m: 0 for m in layout.boson_blocks}, {m: 0 for m in layout.fermion_qubits})

    def with_occupation(self, mode: ModeKey, n: int) -> "OccupationConfig":
        bos, fer = dict(self.boson_occ), dict(self.fermion_occ)
        if mode.species is Species.GLUON:
            bos[mode] = n
        else:
            fer[mode] = n
        return OccupationConfig(bos, fer)


def _validate(config: OccupationConfig, layout: RegisterLayout) -> None:
    if set(config.boson_occ) != set(layout.boson_blocks) or set(config.fermion_occ) != set(layout.fermion_qubits):
        raise InvalidConfig("occupation config must list every mode of the layout exactly once")
    for m, n in config.boson_occ.items():
        if int(n) != n or not 0 <= n <= layout.cutoff:
            raise InvalidConfig(f"boson occupation {n} of {m} outside [0, {layout.cutoff}]")
    for m, n in config.fermion_occ.items():
        if n not in (0, 1):
            raise InvalidConfig(f"fermion occupation {n} of {m} must be 0 or 1")


def occ_to_basis_index(config: OccupationConfig, layout: RegisterLayout) -> int:
    _validate(config, layout)
    index = 0
    for m, n in config.fermion_occ.items():
        if n:
            index |= 1 << layout.fermion_qubits[m]
    for m, n in config.boson_occ.items():
        index |= 1 << layout.boson_blocks[m][int(n)]
    return index


def basis_index_to_occ(index: int, layout: RegisterLayout) -> OccupationConfig:
    if index < 0 or index >> layout.total_qubits:
        raise InvalidConfig(f"basis index {index} outside a {layout.total_qubits}-qubit register")
    fer = {m: (index >> q) & 1 for m, q in layout.fermion_qubits.items()}
    bos = {}
    for m, block in layout.boson_blocks.items():
        marks = [h for h, q in enumerate(block) if (index >> q) & 1]
        if len(marks) != 1:
            raise InvalidConfig(f"block of {m} holds {len(marks)} markers; not a valid unary state")
        bos[m] = marks[0]
    return OccupationConfig(bos, fer)


def valid_unary_subspace(layout: RegisterLayout):
    """Predicate: every gluon block of the index has exactly one marker bit."""
    masks = [sum(1 << q for q in block) for block in layout.boson_blocks.values()]

    def is_valid(index: int) -> bool:
        return all((index & mask).bit_count() == 1 for mask in masks)

    return is_valid


def unary_mask(blocks, qubit_positions: dict, n_qubits: int) -> np.ndarray:
    """Boolean array over 2**n_qubits basis states: True where each listed block is one-hot.

    ``blocks`` are tuples of layout qubits; ``qubit_positions`` maps a layout
    qubit to its bit position in the (possibly compressed) register.
    """
    idx = np.arange(1 << n_qubits, dtype=np.int64)
    ok = np.ones(idx.shape, dtype=bool)
    for block in blocks:
        count = np.zeros(idx.shape, dtype=np.int64)
        for q in block:
            count += (idx >> qubit_positions[q]) & 1
        ok &= count == 1
    return ok


def parse_layout_json(text: str) -> list[dict]:
    rows = json.loads(text)
    if not isinstance(rows, list):
        raise InvalidParameter("layout dump must be a JSON array")
    return rows
