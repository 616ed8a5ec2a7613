"""Digital quantum simulation of SU(N) Yang-Mills theory in momentum space.

Modules, bottom-up: ``theory`` (group data, spinors, vertex weights),
``lattice`` (momentum sites and modes), ``encoding`` (qubit layout),
``pauli`` (Pauli algebra and Jordan-Wigner maps), ``hamiltonian``
(interaction terms), ``circuit`` (gate synthesis and counting),
``simulator`` (statevector evolution), ``hadronize`` (singlet states) and
``cli``.
"""

from .errors import (CapacityError, ConfigurationError, InvalidConfig, InvalidParameter, KinematicsError,
                     NotCoveredError, YMSimError)
from .theory import ModelParams

__version__ = "0.1.0"

__all__ = [
    "CapacityError",
    "ConfigurationError",
    "InvalidConfig",
    "InvalidParameter",
    "KinematicsError",
    "ModelParams",
    "NotCoveredError",
    "YMSimError",
]
