"""Cavity-coupled Su-Schrieffer-Heeger qubit arrays.

Eigenmodes and cavity couplings, weak-probe spectroscopy, dispersive
edge-state dynamics, waveguide scattering, coupler circuit maps and a
small master-equation oracle. Frequencies are angular, in rad/us.
"""

from __future__ import annotations

from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0.1.0"

from .circuit import CouplerCircuit, ResonatorCoupler
from .dispersive import DispersiveParams
from .errors import TopoCQEDError
from .lattice import ArrayParams, EigenMode, build_hamiltonian, eigensystem
from .scattering import ScatteringParams
from .spectroscopy import CavityParams

__all__ = [
    "ArrayParams",
    "CavityParams",
    "CouplerCircuit",
    "DispersiveParams",
    "EigenMode",
    "ResonatorCoupler",
    "ScatteringParams",
    "TopoCQEDError",
    "__version__",
    "build_hamiltonian",
    "eigensystem",
]
