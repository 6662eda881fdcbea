"""Weak-probe cavity spectroscopy of the SSH array.

In the low-excitation limit the cavity field and the qubit coherences obey
linear equations, so the steady-state reflection follows from one complex
linear solve per drive frequency. The result does not depend on the drive
strength, which therefore never enters these functions.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np
from scipy.signal import find_peaks

from .errors import DomainError, SingularityError
from .lattice import ArrayParams, build_hamiltonian

COUPLING_PRESETS = ("homogeneous", "alternating-sign-8")


@dataclass(frozen=True, eq=False)
class CavityParams:
    """Driven cavity. ``coupling_vector`` holds one real g per qubit (rad/us)."""

    cavity_freq: float
    kappa: float
    coupling_vector: Sequence[float]
    drive_freq: Optional[float] = None
    drive_strength: float = 0.0

    def __post_init__(self):
        if not self.kappa > 0:
            raise DomainError(f"kappa must be positive, got {self.kappa}")
        if self.drive_strength < 0:
            raise DomainError("drive strength must be nonnegative")
        g = np.array(self.coupling_vector, dtype=float).reshape(-1)
        g.setflags(write=False)
        object.__setattr__(self, "coupling_vector", g)

    def replace(self, **changes) -> "CavityParams":
        return replace(self, **changes)


def coupling_preset(name: str, n_sites: int, g0: float) -> np.ndarray:
    """Named cavity-qubit coupling patterns.

    ``alternating-sign-8`` is g0 * (-1, 1, 1, 1, -1, 1, 1, 1) for 8 qubits.
    """
    if name == "homogeneous":
        return np.full(n_sites, float(g0))
    if name == "alternating-sign-8":
        if n_sites != 8:
            raise DomainError("alternating-sign-8 is defined for 8 qubits")
        return g0 * np.array([-1.0, 1, 1, 1, -1, 1, 1, 1])
    raise DomainError(f"unknown coupling preset {name!r}; choose from {COUPLING_PRESETS}")


def _check(array: ArrayParams, cav: CavityParams) -> None:
    if cav.coupling_vector.size != array.n_sites:
        raise DomainError(f"coupling vector has {cav.coupling_vector.size} entries for {array.n_sites} qubits")


def cavity_response(array: ArrayParams, cav: CavityParams, drive_freqs) -> np.ndarray:
    """Normalized cavity amplitude (kappa/2) / (kappa/2 + i Dc - i g^T M^-1 g).

    ``M = H - omega_l - i Gamma/2`` is solved by LU (one system per drive
    frequency, batched); no inverse is formed.
    """
    _check(array, cav)
    w = np.atleast_1d(np.asarray(drive_freqs, dtype=float))
    a = build_hamiltonian(array).astype(complex) - 0.5j * np.diag(array.qubit_decays)
    g = cav.coupling_vector
    if not np.any(g):
        self_energy = np.zeros(w.size, dtype=complex)
    else:
        eye = np.eye(array.n_sites)
        m = a[None, :, :] - w[:, None, None] * eye[None, :, :]
        rhs = np.broadcast_to(g.astype(complex), (w.size, g.size))[..., None]
        try:
            x = np.linalg.solve(m, rhs)[..., 0]
        except np.linalg.LinAlgError as exc:
            raise SingularityError(
                "qubit response matrix is singular at a drive frequency; use nonzero qubit decays"
            ) from exc
        if not np.all(np.isfinite(x)) or (
            np.min(array.qubit_decays) == 0 and np.max(np.abs(x)) * np.abs(a).max() > 1e13 * np.linalg.norm(g)
        ):
            raise SingularityError("qubit response diverges on an undamped resonance; use nonzero qubit decays")
        self_energy = x @ g
    half = 0.5 * cav.kappa
    return half / (half + 1j * (cav.cavity_freq - w) - 1j * self_energy)


def reflection_spectrum(array: ArrayParams, cav: CavityParams, drive_freqs) -> tuple[np.ndarray, np.ndarray]:
    """Reflection R and its complement T = 1 - R over a drive-frequency grid."""
    t = np.abs(cavity_response(array, cav, drive_freqs)) ** 2
    return 1.0 - t, t


def steady_state_reflection(array: ArrayParams, cav: CavityParams) -> tuple[float, float]:
    """``(R, T)`` at the single drive frequency ``cav.drive_freq``."""
    if cav.drive_freq is None:
        raise DomainError("cav.drive_freq is required")
    r, t = reflection_spectrum(array, cav, [cav.drive_freq])
    return float(r[0]), float(t[0])


@dataclass(frozen=True, eq=False)
class SpectralMap:
    phi_grid: np.ndarray
    drive_grid: np.ndarray
    values: np.ndarray
    eigenenergies: np.ndarray

    @property
    def transmission(self) -> np.ndarray:
        return 1.0 - self.values


def reflection_map(
    array: ArrayParams,
    cav: CavityParams,
    phi_grid,
    drive_grid,
    jobs: int = 1,
) -> SpectralMap:
    """Reflection over (phi, drive) with rows ordered as ``phi_grid``.

    ``array`` is a template whose ``phi`` is replaced row by row. Rows are
    independent and may be evaluated by ``jobs`` worker threads; the output
    order never depends on completion order.
    """
    phis = np.asarray(phi_grid, dtype=float)
    drives = np.asarray(drive_grid, dtype=float)

    def row(phi):
        arr = array.replace(phi=float(phi))
        r, _ = reflection_spectrum(arr, cav, drives)
        return r, np.linalg.eigvalsh(build_hamiltonian(arr))

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(row, phis))
    else:
        rows = [row(p) for p in phis]
    values = np.array([r for r, _ in rows]).reshape(phis.size, drives.size)
    energies = np.array([e for _, e in rows]).reshape(phis.size, array.n_sites)
    return SpectralMap(phis, drives, values, energies)


def disorder_sample(array: ArrayParams, eps: float, seed) -> ArrayParams:
    """Copy of ``array`` with i.i.d. uniform frequency offsets in [-eps, eps]."""
    if eps < 0:
        raise DomainError("disorder strength must be nonnegative")
    if eps == 0:
        offsets = np.zeros(array.n_sites)
    else:
        offsets = np.random.default_rng(seed).uniform(-eps, eps, array.n_sites)
    return array.replace(frequency_offsets=offsets)


# ---------------------------------------------------------------------------
# peak analysis


@dataclass(frozen=True)
class RabiPeaks:
    positions: tuple
    heights: tuple
    splitting: float
    resolvable: bool
    resolvable_analytic: Optional[bool] = None
    all_positions: tuple = ()


def refine_extremum(x: np.ndarray, y: np.ndarray, i: int) -> tuple[float, float]:
    """Three-point parabolic refinement of a sampled extremum at index ``i``."""
    if i <= 0 or i >= len(y) - 1:
        return float(x[i]), float(y[i])
    y0, y1, y2 = y[i - 1], y[i], y[i + 1]
    den = y0 - 2.0 * y1 + y2
    if den == 0:
        return float(x[i]), float(y1)
    shift = 0.5 * (y0 - y2) / den
    h = 0.5 * (x[i + 1] - x[i - 1])
    return float(x[i] + shift * h), float(y1 - 0.25 * (y0 - y2) * shift)


def rabi_resolvable(phi: float, g0: float, kappa: float, gamma: float) -> bool:
    """Edge-state Rabi splitting criterion 2 sqrt(2 cos phi) g0 > (kappa + gamma) / 2."""
    return 2.0 * math.sqrt(2.0 * max(math.cos(phi), 0.0)) * abs(g0) > 0.5 * (kappa + gamma)


def find_rabi_peaks(
    drive_grid,
    transmission,
    phi: Optional[float] = None,
    g0: Optional[float] = None,
    kappa: Optional[float] = None,
    gamma: Optional[float] = None,
    prominence: float = 1e-3,
) -> RabiPeaks:
    """Locate the two dominant transmission peaks and their splitting.

    Peaks are discrete local maxima whose prominence exceeds ``prominence``
    times the largest value, refined by a parabola through three samples.
    When ``phi, g0, kappa, gamma`` are all given the analytic resolvability
    criterion is evaluated too.
    """
    x = np.asarray(drive_grid, dtype=float)
    y = np.asarray(transmission, dtype=float)
    analytic = None
    if None not in (phi, g0, kappa, gamma):
        analytic = rabi_resolvable(phi, g0, kappa, gamma)
    idx, _ = find_peaks(y, prominence=prominence * max(float(y.max()), 1e-300))
    refined = [refine_extremum(x, y, int(i)) for i in idx]
    all_pos = tuple(p for p, _ in refined)
    if len(refined) < 2:
        pos = all_pos
        heights = tuple(h for _, h in refined)
        return RabiPeaks(pos, heights, 0.0, False, analytic, all_pos)
    top = sorted(sorted(range(len(refined)), key=lambda k: -refined[k][1])[:2])
    (p1, h1), (p2, h2) = refined[top[0]], refined[top[1]]
    return RabiPeaks((p1, p2), (h1, h2), p2 - p1, True, analytic, all_pos)
