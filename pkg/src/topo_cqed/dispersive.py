"""Cavity-mediated dynamics of the array in the dispersive regime.

The far-detuned cavity is eliminated (vacuum assumed), leaving a
2N-dimensional single-excitation Hamiltonian in the frame rotating at the
cavity frequency. Propagation is exact: spectral decomposition for Hermitian
generators, eigendecomposition or scaling-and-squaring otherwise.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import DomainError, IntegratorError, NoOscillationError, SingularityError
from .lattice import ArrayParams, build_hamiltonian, eigensystem, modes_matrix
from .spectroscopy import refine_extremum

#: Eigenvector-matrix condition number above which eig-based propagation is abandoned.
MAX_EIGVEC_COND = 1e8


@dataclass(frozen=True)
class DispersiveParams:
    """Uniform cavity coupling ``g0`` and detuning ``delta0 = omega0 - omega_c`` (rad/us)."""

    g0: float
    delta0: float
    include_decay: bool = False
    kappa: float = 0.0

    def __post_init__(self):
        if self.delta0 == 0:
            raise SingularityError("dispersive elimination needs a nonzero detuning delta0")
        ratio = abs(self.g0 / self.delta0)
        if ratio >= 1:
            raise DomainError(f"|g0/delta0| = {ratio:.3g} is not dispersive")
        if ratio > 0.2:
            warnings.warn(f"|g0/delta0| = {ratio:.3g} > 0.2: dispersive approximation is marginal", stacklevel=3)
        if self.kappa < 0:
            raise DomainError("kappa must be nonnegative")

    @property
    def exchange(self) -> float:
        """Virtual-photon exchange (and Lamb shift) g0^2 / delta0."""
        return self.g0**2 / self.delta0

    @property
    def purcell_rate(self) -> float:
        return self.kappa * (self.g0 / self.delta0) ** 2

    @property
    def cavity_freq_offset(self) -> float:
        """omega_c - omega0."""
        return -self.delta0


def edge_coupling_strength(phi: float, g0: float, delta0: float) -> float:
    """Cavity-mediated edge-edge coupling cos(phi) g0^2 / delta0."""
    return math.cos(phi) * g0**2 / delta0


def _decay_diagonal(array: ArrayParams, disp: DispersiveParams) -> np.ndarray:
    return array.qubit_decays + disp.purcell_rate


def effective_hamiltonian_qubits(array: ArrayParams, disp: DispersiveParams) -> np.ndarray:
    """Site-basis effective Hamiltonian in the frame rotating at omega_c.

    ``delta0 + offsets`` on the diagonal, a uniform ``g0^2/delta0`` between
    every pair of qubits (diagonal included: Lamb shift) and the SSH bonds.
    With ``include_decay`` each site gets ``-i (gamma + kappa g0^2/delta0^2) / 2``.
    """
    n = array.n_sites
    h = build_hamiltonian(array) - array.qubit_freq * np.eye(n)
    h += disp.delta0 * np.eye(n) + disp.exchange * np.ones((n, n))
    if disp.include_decay:
        return h - 0.5j * np.diag(_decay_diagonal(array, disp))
    return h


def mode_detunings(array: ArrayParams, disp: DispersiveParams, modes=None):
    """``(modes, delta_j)`` with ``delta_j = omega_j - omega_c``."""
    if modes is None:
        modes = eigensystem(build_hamiltonian(array), array)
    energies, _ = modes_matrix(modes)
    return modes, energies - array.qubit_freq + disp.delta0


def mode_couplings(xi_tilde: np.ndarray, detunings: np.ndarray) -> np.ndarray:
    """Cavity-mediated mode-mode couplings J_jk = xi_j xi_k (1/D_j + 1/D_k) / 2."""
    inv = 1.0 / detunings
    return 0.5 * np.outer(xi_tilde, xi_tilde) * (inv[:, None] + inv[None, :])


def effective_hamiltonian_modes(array: ArrayParams, disp: DispersiveParams, modes=None) -> np.ndarray:
    """Eigenmode-basis effective Hamiltonian.

    Diagonal ``delta_j + xi_j^2 / delta_j`` and off-diagonal ``J_jk``; the
    diagonal of :func:`mode_couplings` is exactly ``xi_j^2 / delta_j`` so the
    whole matrix is ``diag(delta_j) + J``. Mode order follows the eigensystem.
    """
    modes, det = mode_detunings(array, disp, modes)
    tol = 1e-12 * max(1.0, abs(disp.delta0))
    resonant = [m.index for m, d in zip(modes, det) if abs(d) < tol]
    if resonant:
        raise SingularityError(f"cavity resonant with eigenmode(s) {resonant}")
    xi_tilde = disp.g0 * np.array([m.coupling for m in modes])
    h = np.diag(det) + mode_couplings(xi_tilde, det)
    if disp.include_decay:
        _, v = modes_matrix(modes)
        h = h - 0.5j * (v.T @ np.diag(_decay_diagonal(array, disp)) @ v)
    return h


def modes_to_sites(h_modes: np.ndarray, modes) -> np.ndarray:
    """Rotate an eigenmode-basis operator back to the site basis."""
    _, v = modes_matrix(modes)
    return v @ h_modes @ v.T


# ---------------------------------------------------------------------------
# propagation


@dataclass(frozen=True, eq=False)
class DynamicsTrace:
    times: np.ndarray
    populations: np.ndarray
    norm: np.ndarray
    metadata: dict = field(default_factory=dict)

    def site(self, site: int) -> np.ndarray:
        """Population of 1-based ``site`` versus time."""
        return self.populations[:, site - 1]


def _propagate(h: np.ndarray, psi0: np.ndarray, times: np.ndarray) -> tuple[np.ndarray, str]:
    if np.allclose(h, h.conj().T, rtol=0, atol=1e-12 * max(1.0, np.abs(h).max())):
        w, v = np.linalg.eigh(0.5 * (h + h.conj().T))
        c = v.conj().T @ psi0
        return v @ (np.exp(-1j * np.outer(w, times)) * c[:, None]), "eigh"
    w, v = np.linalg.eig(h)
    if np.linalg.cond(v) <= MAX_EIGVEC_COND:
        c = np.linalg.solve(v, psi0)
        return v @ (np.exp(-1j * np.outer(w, times)) * c[:, None]), "eig"
    cols = [scipy.linalg.expm(-1j * h * t) @ psi0 for t in times]
    return np.array(cols).T, "expm"


def evolve_excitation(h: np.ndarray, initial_site: int, t_grid) -> DynamicsTrace:
    """Populations |<n| exp(-i H t) |initial>|^2 for a single excitation.

    ``initial_site`` is 1-based. ``metadata['method']`` records which
    propagator ran; ``expm`` marks the fallback for near-defective generators.
    """
    h = np.asarray(h)
    n = h.shape[0]
    if not 1 <= initial_site <= n:
        raise DomainError(f"initial_site must lie in [1, {n}]")
    if not np.all(np.isfinite(h)):
        raise IntegratorError("generator has non-finite entries")
    times = np.asarray(t_grid, dtype=float).reshape(-1)
    psi0 = np.zeros(n, dtype=complex)
    psi0[initial_site - 1] = 1.0
    amps, method = _propagate(h, psi0, times)
    if not np.all(np.isfinite(amps)):
        raise IntegratorError("propagation produced non-finite amplitudes")
    pops = np.abs(amps.T) ** 2
    return DynamicsTrace(times, pops, pops.sum(axis=1), {"method": method, "initial_site": initial_site})


def measure_oscillation_period(trace: DynamicsTrace, site: int) -> tuple[float, float]:
    """Revival period T of ``site``'s population and the coupling pi / T.

    The population must first drop below 1/2 and then come back above 1/2;
    the revival maximum is the largest sample in that excursion, refined by
    a parabola.
    """
    y = trace.site(site)
    x = trace.times
    below = np.nonzero(y < 0.5)[0]
    if below.size == 0:
        raise NoOscillationError(f"site {site} never drops below 1/2")
    i_down = below[0]
    above = np.nonzero(y[i_down:] > 0.5)[0]
    if above.size == 0:
        raise NoOscillationError(f"no revival above 1/2 on site {site}")
    i_up = i_down + above[0]
    again = np.nonzero(y[i_up:] < 0.5)[0]
    i_end = i_up + again[0] if again.size else y.size
    i_max = i_up + int(np.argmax(y[i_up:i_end]))
    period, _ = refine_extremum(x, y, i_max)
    return period - x[0], math.pi / (period - x[0])
