"""Pauli strings, Pauli sums and the Jordan-Wigner ladder operators.

A string is stored symplectically as two bit masks (x, z); the letter on
qubit q is I, X, Z or Y for bit pairs (0,0), (1,0), (0,1), (1,1). With that
encoding letters(x, z) = i^{|x & z|} X^x Z^z, which gives exact phase
tracking for products.

Qubit 0 is the least significant bit of a basis index.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import CapacityError, InvalidParameter
from .lattice import ModeKey, ModeOrdering, Species

ORACLE_QUBIT_LIMIT = 12
SPARSE_QUBIT_LIMIT = 24

_LETTER_BITS = {"X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_I_POW = (1, 1j, -1, -1j)


def _phase_exp(x1: int, z1: int, x2: int, z2: int) -> int:
    # power of i picked up by letters(x1,z1) @ letters(x2,z2)
    x, z = x1 ^ x2, z1 ^ z2
    return ((x1 & z1).bit_count() + (x2 & z2).bit_count() - (x & z).bit_count()
            + 2 * (z1 & x2).bit_count()) & 3


def _letters(x: int, z: int) -> dict[int, str]:
    out = {}
    bits = x | z
    while bits:
        low = bits & -bits
        q = low.bit_length() - 1
        out[q] = "Y" if (x & low and z & low) else ("X" if x & low else "Z")
        bits ^= low
    return out


def pattern_key(x: int, z: int) -> tuple:
    """Deterministic sort key of a letter pattern: ((qubit, letter), ...)."""
    return tuple(sorted(_letters(x, z).items()))


@dataclass(frozen=True)
class PauliString:
    coeff: complex
    x: int = 0
    z: int = 0

    @classmethod
    def from_letters(cls, letters, coeff: complex = 1.0) -> "PauliString":
        """``letters`` is a dict {qubit: 'X'|'Y'|'Z'|'I'} or a string like 'X0 Z3'."""
        if isinstance(letters, str):
            letters = {int(tok[1:]): tok[0] for tok in letters.split()}
        x = z = 0
        for q, letter in letters.items():
            letter = letter.upper()
            if letter == "I":
                continue
            if letter not in _LETTER_BITS or q < 0:
                raise InvalidParameter(f"bad Pauli letter {letter!r} on qubit {q}")
            bx, bz = _LETTER_BITS[letter]
            x |= bx << q
            z |= bz << q
        return cls(complex(coeff), x, z)

    @property
    def letters(self) -> dict[int, str]:
        return _letters(self.x, self.z)

    @property
    def weight(self) -> int:
        return (self.x | self.z).bit_count()

    @property
    def pattern(self) -> tuple[int, int]:
        return (self.x, self.z)

    def __str__(self) -> str:
        body = " ".join(f"{l}{q}" for q, l in sorted(self.letters.items()))
        return f"{self.coeff} {body}".strip()


def pauli_mul(a: PauliString, b: PauliString) -> PauliString:
    phase = _I_POW[_phase_exp(a.x, a.z, b.x, b.z)]
    return PauliString(a.coeff * b.coeff * phase, a.x ^ b.x, a.z ^ b.z)


def _popcount(arr: np.ndarray) -> np.ndarray:
    return np.bitwise_count(arr).astype(np.int64)


class PauliSum:
    """Linear combination of Pauli strings, combined over identical patterns."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms: dict[tuple[int, int], complex] = {}
        if terms is None:
            return
        if isinstance(terms, dict):
            for key, c in terms.items():
                self._add(key, c)
        else:
            for t in terms:
                self._add((t.x, t.z), t.coeff)

    def _add(self, key, c):
        self.terms[key] = self.terms.get(key, 0.0) + complex(c)

    @classmethod
    def identity(cls, coeff: complex = 1.0) -> "PauliSum":
        return cls({(0, 0): coeff})

    @classmethod
    def from_letters(cls, letters, coeff: complex = 1.0) -> "PauliSum":
        return cls([PauliString.from_letters(letters, coeff)])

    def copy(self) -> "PauliSum":
        out = PauliSum()
        out.terms = dict(self.terms)
        return out

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self):
        for (x, z), c in self.terms.items():
            yield PauliString(c, x, z)

    def sorted_strings(self) -> list[PauliString]:
        return sorted(self, key=lambda s: pattern_key(s.x, s.z))

    def __add__(self, other: "PauliSum") -> "PauliSum":
        out = self.copy()
        for key, c in other.terms.items():
            out._add(key, c)
        return out

    def __iadd__(self, other: "PauliSum") -> "PauliSum":
        for key, c in other.terms.items():
            self._add(key, c)
        return self

    def __neg__(self) -> "PauliSum":
        return self * -1.0

    def __sub__(self, other: "PauliSum") -> "PauliSum":
        return self + (-other)

    def __mul__(self, scalar) -> "PauliSum":
        out = PauliSum()
        out.terms = {k: c * scalar for k, c in self.terms.items()}
        return out

    __rmul__ = __mul__

    def __matmul__(self, other: "PauliSum") -> "PauliSum":
        out: dict = {}
        get = out.get
        for (x1, z1), c1 in self.terms.items():
            n1 = (x1 & z1).bit_count()
            for (x2, z2), c2 in other.terms.items():
                x, z = x1 ^ x2, z1 ^ z2
                e = (n1 + (x2 & z2).bit_count() - (x & z).bit_count() + 2 * (z1 & x2).bit_count()) & 3
                key = (x, z)
                out[key] = get(key, 0.0) + c1 * c2 * _I_POW[e]
        res = PauliSum()
        res.terms = out
        return res

    def adjoint(self) -> "PauliSum":
        out = PauliSum()
        out.terms = {k: c.conjugate() for k, c in self.terms.items()}
        return out

    def hermitian_part(self) -> "PauliSum":
        out = PauliSum()
        out.terms = {k: complex(c.real) for k, c in self.terms.items()}
        return out

    def is_hermitian(self, atol: float = 0.0) -> bool:
        return all(abs(c.imag) <= atol for c in self.terms.values())

    def simplify(self, atol: float = 0.0, rtol: float = 0.0) -> "PauliSum":
        """Drop terms with |c| <= max(atol, rtol * max|c|); exact zeros always go."""
        if not self.terms:
            return PauliSum()
        scale = max(abs(c) for c in self.terms.values())
        cut = max(atol, rtol * scale)
        out = PauliSum()
        out.terms = {k: c for k, c in self.terms.items() if abs(c) > cut}
        return out

    def max_abs(self) -> float:
        return max((abs(c) for c in self.terms.values()), default=0.0)

    def support(self) -> set[int]:
        bits = 0
        for x, z in self.terms:
            bits |= x | z
        return set(_letters(bits, 0))

    def remap(self, mapping: dict[int, int]) -> "PauliSum":
        """Relabel qubits; every qubit in the support must be mapped."""
        out = PauliSum()
        for (x, z), c in self.terms.items():
            nx = nz = 0
            for q, letter in _letters(x, z).items():
                bx, bz = _LETTER_BITS[letter]
                nq = mapping[q]
                nx |= bx << nq
                nz |= bz << nq
            out._add((nx, nz), c)
        return out

    def equals(self, other: "PauliSum", atol: float = 0.0) -> bool:
        diff = (self - other).simplify(atol=atol)
        return len(diff) == 0

    # -- dense / sparse realizations ---------------------------------------

    def _columns(self, n_qubits: int):
        dim = 1 << n_qubits
        k = np.arange(dim, dtype=np.int64)
        for (x, z), c in self.terms.items():
            if (x | z) >> n_qubits:
                raise InvalidParameter(f"Pauli term acts outside a {n_qubits}-qubit register")
            sign = 1 - 2 * (_popcount(k & z) & 1)
            yield k ^ x, c * _I_POW[(x & z).bit_count() & 3] * sign

    def to_dense_matrix(self, n_qubits: int, limit: int = ORACLE_QUBIT_LIMIT) -> np.ndarray:
        if n_qubits > limit:
            raise CapacityError(f"dense matrix on {n_qubits} qubits exceeds oracle limit {limit}")
        dim = 1 << n_qubits
        mat = np.zeros((dim, dim), dtype=complex)
        cols = np.arange(dim)
        for rows, vals in self._columns(n_qubits):
            mat[rows, cols] += vals
        return mat

    def to_sparse(self, n_qubits: int, limit: int = SPARSE_QUBIT_LIMIT) -> sp.csr_matrix:
        if n_qubits > limit:
            raise CapacityError(f"sparse matrix on {n_qubits} qubits exceeds limit {limit}")
        dim = 1 << n_qubits
        cols = np.arange(dim)
        mat = sp.csr_matrix((dim, dim), dtype=complex)
        for rows, vals in self._columns(n_qubits):
            mat = mat + sp.csr_matrix((vals, (rows, cols)), shape=(dim, dim))
        return mat

    def apply(self, vec: np.ndarray) -> np.ndarray:
        n_qubits = int(vec.shape[0]).bit_length() - 1
        out = np.zeros_like(vec, dtype=complex)
        for rows, vals in self._columns(n_qubits):
            out[rows] += vals * vec
        return out

    # -- text form ----------------------------------------------------------

    def to_text(self) -> str:
        lines = []
        for s in self.sorted_strings():
            body = " ".join(f"{l}{q}" for q, l in sorted(s.letters.items()))
            lines.append(f"({s.coeff.real:.16e},{s.coeff.imag:.16e}) {body}".rstrip())
        return "\n".join(lines) + ("\n" if lines else "")

    @classmethod
    def from_text(cls, text: str) -> "PauliSum":
        out = cls()
        pat = re.compile(r"^\(([^,]+),([^)]+)\)\s*(.*)$")
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            m = pat.match(line)
            if not m:
                raise InvalidParameter(f"cannot parse Pauli term line: {line!r}")
            coeff = complex(float(m.group(1)), float(m.group(2)))
            out += cls.from_letters(m.group(3), coeff)
        return out

    def __repr__(self) -> str:
        return f"PauliSum({len(self)} terms)"


def commutator(a: PauliSum, b: PauliSum) -> PauliSum:
    return a @ b - b @ a


def anticommutator(a: PauliSum, b: PauliSum) -> PauliSum:
    return a @ b + b @ a


# ---------------------------------------------------------------------------
# Jordan-Wigner ladder operators


def _sigma_lower_to_one(q: int) -> PauliSum:
    # |1><0| = (X - iY)/2: unoccupied -> occupied
    return PauliSum({(1 << q, 0): 0.5, (1 << q, 1 << q): -0.5j})


def _sigma_one_to_zero(q: int) -> PauliSum:
    # |0><1| = (X + iY)/2
    return PauliSum({(1 << q, 0): 0.5, (1 << q, 1 << q): 0.5j})


def _fermion_qubit(mode: ModeKey, ordering: ModeOrdering) -> int:
    if not mode.species.fermionic:
        raise InvalidParameter(f"{mode} is not a fermionic mode")
    return ordering.kappa(mode)


def jw_fermion_ops(mode: ModeKey, ordering: ModeOrdering) -> tuple[PauliSum, PauliSum]:
    """(creation, annihilation) for a fermionic mode.

    creation = (prod_{kappa' < kappa} Z) |1><0|_kappa, so acting on an empty
    mode gives the sign (-1)^(number of occupied modes with smaller kappa).
    Gluon qubits never enter the Z-string.
    """
    q = _fermion_qubit(mode, ordering)
    string = PauliSum({(0, (1 << q) - 1): 1.0})
    create = string @ _sigma_lower_to_one(q)
    return create, create.adjoint()


def ghost_field_ops(color: int, site, ordering: ModeOrdering) -> dict[str, PauliSum]:
    """Ghost/antighost operators as they appear in the field expansions.

    ``d`` and ``e`` annihilate the ghost and antighost slots. The expansion
    daggers are realized as e_dag = -f_ghost^dagger and d_dag = -f_antighost^dagger,
    which gives {d, e_dag} = {e, d_dag} = -1 and makes every other
    anticommutator among the four vanish.
    """
    ghost = ModeKey(Species.GHOST, tuple(site), color, 0)
    antighost = ModeKey(Species.ANTIGHOST, tuple(site), color, 0)
    g_create, g_annih = jw_fermion_ops(ghost, ordering)
    a_create, a_annih = jw_fermion_ops(antighost, ordering)
    return {"d": g_annih, "e": a_annih, "d_dag": -a_create, "e_dag": -g_create}


def jw_boson_ops(mode: ModeKey, layout, cutoff: int | None = None) -> tuple[PauliSum, PauliSum]:
    """(creation, annihilation) for a gluon mode on its one-hot block.

    creation = sum_h sqrt(h+1) |0><1|_h |1><0|_{h+1}: moves the marker from
    block position h to h+1, and kills the state with the marker at the cutoff.
    """
    if mode.species is not Species.GLUON:
        raise InvalidParameter(f"{mode} is not a gauge-boson mode")
    block = layout.block_of(mode)
    cutoff = layout.cutoff if cutoff is None else cutoff
    if cutoff != len(block) - 1:
        raise InvalidParameter(f"cutoff {cutoff} does not match block size {len(block)}")
    create = PauliSum()
    for h in range(cutoff):
        create += math.sqrt(h + 1) * (_sigma_one_to_zero(block[h]) @ _sigma_lower_to_one(block[h + 1]))
    return create, create.adjoint()


def number_operator(qubit: int) -> PauliSum:
    return PauliSum({(0, 0): 0.5, (0, 1 << qubit): -0.5})


def quark_charge(layout) -> PauliSum:
    """Q = sum n_quark - sum n_antiquark."""
    q = PauliSum()
    for mode, qubit in layout.fermion_qubits.items():
        if mode.species is Species.QUARK:
            q += number_operator(qubit)
        elif mode.species is Species.ANTIQUARK:
            q -= number_operator(qubit)
    return q.simplify()


def ghost_charge(layout) -> PauliSum:
    """n_ghost - n_antighost."""
    q = PauliSum()
    for mode, qubit in layout.fermion_qubits.items():
        if mode.species is Species.GHOST:
            q += number_operator(qubit)
        elif mode.species is Species.ANTIGHOST:
            q -= number_operator(qubit)
    return q.simplify()


def gluon_number(layout) -> PauliSum:
    """Total gluon number sum_modes sum_h h * |marker at h><marker at h|."""
    total = PauliSum()
    for block in layout.boson_blocks.values():
        for h, q in enumerate(block):
            if h:
                total += h * number_operator(q)
    return total.simplify()


# ---------------------------------------------------------------------------
# Array form used by the bulk Hamiltonian builders (registers up to 64 qubits)

ARRAY_QUBIT_LIMIT = 64
_I_POW_ARR = np.array(_I_POW, dtype=complex)


def to_arrays(ps: PauliSum) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(x, z, coeff) arrays of a PauliSum; masks as uint64."""
    n = len(ps.terms)
    x = np.fromiter((k[0] for k in ps.terms), dtype=np.uint64, count=n)
    z = np.fromiter((k[1] for k in ps.terms), dtype=np.uint64, count=n)
    c = np.fromiter(ps.terms.values(), dtype=complex, count=n)
    return x, z, c


def from_arrays(x, z, c) -> PauliSum:
    out = PauliSum()
    for xi, zi, ci in zip(x.tolist(), z.tolist(), c.tolist()):
        out._add((xi, zi), ci)
    return out


def array_product(a, b):
    """All pairwise products of two string tables, flattened row-major."""
    x1, z1, c1 = (v[:, None] for v in a)
    x2, z2, c2 = (v[None, :] for v in b)
    x = x1 ^ x2
    z = z1 ^ z2
    e = (_popcount(x1 & z1) + _popcount(x2 & z2) - _popcount(x & z) + 2 * _popcount(z1 & x2)) & 3
    c = c1 * c2 * _I_POW_ARR[e]
    return x.ravel(), z.ravel(), c.ravel()
