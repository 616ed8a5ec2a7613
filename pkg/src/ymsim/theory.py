"""Continuum kinematics of one-flavour SU(N) Yang-Mills theory.

Group data (generalized Gell-Mann generators and structure constants), Dirac
matrices in the standard (Dirac) representation, free spinors, gauge-boson
polarization vectors and the complex vertex weights that end up as Pauli-term
coefficients.

Index conventions used throughout the package: colour, adjoint colour and
spin indices are 0-based; polarization indices are Lorentz labels, ``(1, 2)``
for the two transverse vectors and ``(0, 1, 2, 3)`` when the timelike and
longitudinal vectors are included.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InvalidParameter, KinematicsError

OMEGA_FLOOR = 1e-9

METRIC = np.diag([1.0, -1.0, -1.0, -1.0])

_PAULI = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)


@dataclass(frozen=True)
class ModelParams:
    """Physical and run parameters of a simulation.

    ``gluon_mass_regulator`` is an infrared regulator for massless modes:
    gluons and ghosts get omega = sqrt(|p|^2 + mu^2). Zero reproduces the
    massless theory and makes any zero-momentum gluon mode a kinematics error.
    """

    group_n: int = 2
    coupling_g: float = 1.0
    fermion_mass_m: float = 1.0
    gluon_mass_regulator: float = 0.0
    boson_cutoff: int = 1
    polarization_count: int = 2
    include_ghosts: bool = False
    dt: float = 0.1
    steps_n: int = 10
    t0: float = 0.0

    def __post_init__(self):
        if int(self.group_n) != self.group_n or self.group_n < 2:
            raise InvalidParameter(f"group_n must be an integer >= 2, got {self.group_n}")
        if int(self.boson_cutoff) != self.boson_cutoff or self.boson_cutoff < 1:
            raise InvalidParameter(f"boson_cutoff must be an integer >= 1, got {self.boson_cutoff}")
        if self.polarization_count not in (2, 4):
            raise InvalidParameter(f"polarization_count must be 2 or 4, got {self.polarization_count}")
        if not self.dt > 0:
            raise InvalidParameter(f"dt must be positive, got {self.dt}")
        if int(self.steps_n) != self.steps_n or self.steps_n < 1:
            raise InvalidParameter(f"steps_n must be an integer >= 1, got {self.steps_n}")
        if self.fermion_mass_m < 0 or self.gluon_mass_regulator < 0:
            raise InvalidParameter("masses must be non-negative")

    @property
    def adjoint_dim(self) -> int:
        return self.group_n**2 - 1

    @property
    def polarizations(self) -> tuple[int, ...]:
        return polarization_labels(self.polarization_count)


def polarization_labels(count: int) -> tuple[int, ...]:
    if count == 2:
        return (1, 2)
    if count == 4:
        return (0, 1, 2, 3)
    raise InvalidParameter(f"polarization count must be 2 or 4, got {count}")


# ---------------------------------------------------------------------------
# SU(N)


@dataclass(frozen=True, eq=False)
class GroupData:
    generators: np.ndarray  # (N^2-1, N, N), Tr(t^a t^b) = delta^ab / 2
    structure_constants: np.ndarray  # (N^2-1,)*3, real, totally antisymmetric

    @property
    def n(self) -> int:
        return self.generators.shape[1]


def _gell_mann(n: int) -> list[np.ndarray]:
    # Ordering reproduces the textbook Gell-Mann numbering for n = 3 and the
    # Pauli matrices for n = 2.
    mats = []
    for k in range(1, n):
        for j in range(k):
            sym = np.zeros((n, n), dtype=complex)
            sym[j, k] = sym[k, j] = 1.0
            anti = np.zeros((n, n), dtype=complex)
            anti[j, k] = -1j
            anti[k, j] = 1j
            mats += [sym, anti]
        diag = np.zeros((n, n), dtype=complex)
        diag[np.arange(k), np.arange(k)] = 1.0
        diag[k, k] = -k
        mats.append(diag * np.sqrt(2.0 / (k * (k + 1))))
    return mats


@lru_cache(maxsize=None)
def su_n_generators(n: int) -> GroupData:
    """Generalized Gell-Mann generators t^a = lambda^a / 2 and f^{abc}.

    The structure constants are computed from the commutators,
    f^{abc} = -2i Tr([t^a, t^b] t^c).
    """
    if int(n) != n or n < 2:
        raise InvalidParameter(f"SU(N) needs N >= 2, got {n}")
    t = np.array(_gell_mann(int(n))) / 2.0
    comm = np.einsum("aij,bjk->abik", t, t) - np.einsum("bij,ajk->abik", t, t)
    f = np.einsum("abij,cji->abc", comm, t) * (-2j)
    f = f.real.copy()
    f[np.abs(f) < 1e-14] = 0.0
    t.setflags(write=False)
    f.setflags(write=False)
    return GroupData(generators=t, structure_constants=f)


# ---------------------------------------------------------------------------
# Dirac algebra


@dataclass(frozen=True, eq=False)
class DiracData:
    gamma: np.ndarray  # (4, 4, 4), gamma[mu]
    metric: np.ndarray


@lru_cache(maxsize=None)
def dirac_matrices() -> DiracData:
    """Gamma matrices in the Dirac (standard) representation."""
    eye2 = np.eye(2, dtype=complex)
    zero = np.zeros((2, 2), dtype=complex)
    g0 = np.block([[eye2, zero], [zero, -eye2]])
    gammas = [g0] + [np.block([[zero, s], [-s, zero]]) for s in _PAULI]
    gamma = np.array(gammas)
    gamma.setflags(write=False)
    return DiracData(gamma=gamma, metric=METRIC.copy())


def slash(vec4) -> np.ndarray:
    """Feynman slash v_mu gamma^mu for a contravariant 4-vector."""
    gamma = dirac_matrices().gamma
    lowered = METRIC.diagonal() * np.asarray(vec4, dtype=complex)
    return np.einsum("m,mij->ij", lowered, gamma)


def minkowski_dot(a, b) -> complex:
    """a^mu b_mu without complex conjugation."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    return complex(a[0] * b[0] - a[1:] @ b[1:])


def omega(momentum, mass: float) -> float:
    """On-shell energy sqrt(|p|^2 + m^2)."""
    p = np.asarray(momentum, dtype=float)
    return float(np.sqrt(p @ p + mass * mass))


def _checked_omega(momentum, mass: float) -> float:
    w = omega(momentum, mass)
    if w < OMEGA_FLOOR:
        raise KinematicsError(
            f"mode at momentum {tuple(np.asarray(momentum, float))} has omega={w:.3g}; "
            "set a nonzero mass or gluon_mass_regulator"
        )
    return w


def fermion_omega(momentum, params: ModelParams) -> float:
    return _checked_omega(momentum, params.fermion_mass_m)


def gluon_omega(momentum, params: ModelParams) -> float:
    # Ghosts are massless adjoint fields too and share the regulator.
    return _checked_omega(momentum, params.gluon_mass_regulator)


def four_momentum(momentum, w: float) -> np.ndarray:
    return np.concatenate([[w], np.asarray(momentum, dtype=float)])


_CHI = np.eye(2, dtype=complex)
# eta_s = i sigma_2 chi_s
_ETA = np.array([[0, -1], [1, 0]], dtype=complex)


def dirac_spinor(momentum, mass: float, s: int, kind: str = "particle") -> np.ndarray:
    """Free Dirac spinor u^s(p) or v^s(p) normalized to u^dagger u = 2 omega.

    ``s`` is 0 (spin up along z in the rest frame) or 1. The antiparticle
    two-spinor is eta_s = i sigma_2 chi_s.
    """
    if s not in (0, 1):
        raise InvalidParameter(f"spin index must be 0 or 1, got {s}")
    p = np.asarray(momentum, dtype=float)
    w = omega(p, mass)
    if w < OMEGA_FLOOR:
        raise KinematicsError(f"massless spinor at zero momentum is undefined (omega={w})")
    root = np.sqrt(w + mass)
    sigma_p = np.einsum("i,ijk->jk", p, _PAULI)
    if kind == "particle":
        chi = _CHI[s]
        return np.concatenate([root * chi, sigma_p @ chi / root])
    if kind == "antiparticle":
        eta = _ETA[s]
        return np.concatenate([sigma_p @ eta / root, root * eta])
    raise InvalidParameter(f"kind must be 'particle' or 'antiparticle', got {kind!r}")


def dirac_bar(spinor: np.ndarray) -> np.ndarray:
    return spinor.conj() @ dirac_matrices().gamma[0]


def polarization_vector(momentum, l: int, count: int = 2) -> np.ndarray:
    """Contravariant polarization 4-vector epsilon^mu_l(p).

    Transverse vectors (l = 1, 2) are the images of x-hat and y-hat under the
    rotation R_z(phi) R_y(theta) that takes z-hat to p-hat; at p = 0 the axis
    is z-hat. With ``count=4`` the timelike (l = 0) and longitudinal (l = 3,
    along p-hat) vectors are added, so that epsilon_l^* . epsilon_l' is the
    metric diag(1, -1, -1, -1).
    """
    if l not in polarization_labels(count):
        raise InvalidParameter(f"polarization {l} invalid for count={count}")
    p = np.asarray(momentum, dtype=float)
    norm = np.sqrt(p @ p)
    if norm == 0.0:
        theta = phi = 0.0
    else:
        theta = np.arccos(np.clip(p[2] / norm, -1.0, 1.0))
        phi = np.arctan2(p[1], p[0])
    ct, st, cp, sp = np.cos(theta), np.sin(theta), np.cos(phi), np.sin(phi)
    vec = np.zeros(4, dtype=complex)
    if l == 0:
        vec[0] = 1.0
    elif l == 1:
        vec[1:] = (ct * cp, ct * sp, -st)
    elif l == 2:
        vec[1:] = (-sp, cp, 0.0)
    else:
        vec[1:] = (st * cp, st * sp, ct)
    return vec


# ---------------------------------------------------------------------------
# Vertex weights


@dataclass(frozen=True)
class WCoeffFermion:
    w1: float
    w2: float

    @property
    def value(self) -> complex:
        return complex(self.w1, self.w2)


@dataclass(frozen=True)
class WCoeffGluon:
    w3: float
    w4: float

    @property
    def value(self) -> complex:
        return complex(self.w3, self.w4)


def spinor_bilinear(bar_spinor: np.ndarray, matrix: np.ndarray, spinor: np.ndarray) -> complex:
    """bar_spinor . matrix . spinor where bar_spinor is already Dirac-barred."""
    return complex(bar_spinor @ matrix @ spinor)


def fermion_vertex_w(p2, p3, r: int, s: int, i: int, j: int, a: int, l: int, t: float,
                     params: ModelParams) -> WCoeffFermion:
    """Real and imaginary parts of ubar^r(p2) (eps_l . gamma) t^a_ij u^s(p3) e^{-i w1 t}.

    The gluon momentum is fixed by conservation, p1 = p2 - p3, and
    w1 = omega(p1) - omega(p2) + omega(p3).
    """
    p2 = np.asarray(p2, dtype=float)
    p3 = np.asarray(p3, dtype=float)
    p1 = p2 - p3
    m = params.fermion_mass_m
    w_total = gluon_omega(p1, params) - fermion_omega(p2, params) + fermion_omega(p3, params)
    color = su_n_generators(params.group_n).generators[a, i, j]
    ubar = dirac_bar(dirac_spinor(p2, m, r, "particle"))
    u = dirac_spinor(p3, m, s, "particle")
    eps = polarization_vector(p1, l, params.polarization_count)
    value = spinor_bilinear(ubar, slash(eps), u) * color * np.exp(-1j * w_total * t)
    return WCoeffFermion(value.real, value.imag)


def gluon_vertex_w(l1: int, l2: int, l3: int, l4: int, p1, p2, p3, p4, t: float,
                   params: ModelParams) -> WCoeffGluon:
    """Real and imaginary parts of eps_{mu,l1} eps_{nu,l2} eps^{mu*}_{l3} eps^{nu*}_{l4} e^{-i w2 t}.

    w2 = omega(p1) + omega(p2) - omega(p3) - omega(p4).
    """
    count = params.polarization_count
    e1, e2, e3, e4 = (polarization_vector(p, l, count) for p, l in
                      ((p1, l1), (p2, l2), (p3, l3), (p4, l4)))
    w_total = (gluon_omega(p1, params) + gluon_omega(p2, params)
               - gluon_omega(p3, params) - gluon_omega(p4, params))
    value = minkowski_dot(e1, e3.conj()) * minkowski_dot(e2, e4.conj()) * np.exp(-1j * w_total * t)
    return WCoeffGluon(value.real, value.imag)
