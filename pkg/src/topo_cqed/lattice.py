"""Single-excitation SSH qubit array: Hamiltonian, eigenmodes and analytic states.

Sites are ordered A1, B1, A2, B2, ..., so site ``n`` (0-based) belongs to
unit cell ``n // 2 + 1`` and sublattice ``"AB"[n % 2]``. The mirror pairing
A_i <-> B_{N+1-i} is plain reversal of this ordering.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional, Sequence

import numpy as np
import scipy.linalg

from .errors import ConvergenceError, DomainError, UnsupportedRegimeError
from .roots import safeguarded_newton, sign_change_brackets

#: Relative size below which an amplitude is ignored by the phase convention.
PHASE_TOL = 1e-8
#: Mid-gap splitting (in units of t0) above which the edge pair counts as hybridized.
HYBRIDIZATION_TOL = 1e-6
#: Mirror-symmetry tolerance used for the parity tag.
PARITY_TOL = 1e-6


class Parity(str, Enum):
    EVEN = "Even"
    ODD = "Odd"
    NONE = "None"


class ModeClass(str, Enum):
    EDGE_HYBRID_EVEN = "EdgeHybridEven"
    EDGE_HYBRID_ODD = "EdgeHybridOdd"
    EDGE_LEFT = "EdgeLeft"
    EDGE_RIGHT = "EdgeRight"
    BULK_LOWER = "BulkLower"
    BULK_UPPER = "BulkUpper"

    @property
    def is_edge(self) -> bool:
        return self.value.startswith("Edge")


class Band(str, Enum):
    LOWER = "Lower"
    UPPER = "Upper"


def _frozen_vector(values, size: int, name: str) -> np.ndarray:
    if values is None:
        arr = np.zeros(size)
    else:
        arr = np.array(values, dtype=float).reshape(-1)
        if arr.size == 1 and size != 1:
            arr = np.full(size, float(arr[0]))
    if arr.shape != (size,):
        raise DomainError(f"{name} must have length {size}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must be finite")
    arr.setflags(write=False)
    return arr


def couplings_from_phi(t0: float, phi: float) -> tuple[float, float]:
    """Dimerized couplings ``(t1, t2) = t0 (1 -/+ cos phi)``."""
    if not t0 > 0:
        raise DomainError(f"t0 must be positive, got {t0}")
    if not 0.0 <= phi <= math.pi:
        raise DomainError(f"phi must lie in [0, pi], got {phi}")
    c = math.cos(phi)
    return t0 * (1.0 - c), t0 * (1.0 + c)


@dataclass(frozen=True, eq=False)
class ArrayParams:
    """SSH qubit array of ``n_cells`` dimers (``2 * n_cells`` qubits).

    Frequencies and rates are angular, in rad/us. ``qubit_decays`` and
    ``frequency_offsets`` accept a scalar (broadcast) or one value per qubit.
    """

    n_cells: int
    qubit_freq: float
    t0: float
    phi: float
    qubit_decays: Optional[Sequence[float]] = None
    frequency_offsets: Optional[Sequence[float]] = None

    def __post_init__(self):
        if int(self.n_cells) != self.n_cells or self.n_cells < 1:
            raise DomainError(f"n_cells must be a positive integer, got {self.n_cells}")
        object.__setattr__(self, "n_cells", int(self.n_cells))
        couplings_from_phi(self.t0, self.phi)
        decays = _frozen_vector(self.qubit_decays, self.n_sites, "qubit_decays")
        if np.any(decays < 0):
            raise DomainError("qubit decays must be nonnegative")
        object.__setattr__(self, "qubit_decays", decays)
        object.__setattr__(
            self, "frequency_offsets", _frozen_vector(self.frequency_offsets, self.n_sites, "frequency_offsets")
        )

    @property
    def n_sites(self) -> int:
        return 2 * self.n_cells

    @property
    def t1(self) -> float:
        return couplings_from_phi(self.t0, self.phi)[0]

    @property
    def t2(self) -> float:
        return couplings_from_phi(self.t0, self.phi)[1]

    @property
    def topological(self) -> bool:
        return self.t1 < self.t2

    @property
    def reference_freq(self) -> float:
        """Band centre: qubit frequency plus the mean disorder offset."""
        return self.qubit_freq + float(np.mean(self.frequency_offsets))

    def replace(self, **changes) -> "ArrayParams":
        return replace(self, **changes)

    def __repr__(self):
        return (
            f"ArrayParams(n_cells={self.n_cells}, qubit_freq={self.qubit_freq!r}, t0={self.t0!r}, "
            f"phi={self.phi!r}, disordered={bool(np.any(self.frequency_offsets))})"
        )


def build_hamiltonian(params: ArrayParams) -> np.ndarray:
    """Real symmetric single-excitation Hamiltonian (diagonal omega0 + offsets)."""
    n = params.n_sites
    h = np.diag(params.qubit_freq + params.frequency_offsets)
    bonds = np.where(np.arange(n - 1) % 2 == 0, params.t1, params.t2)
    idx = np.arange(n - 1)
    h[idx, idx + 1] = bonds
    h[idx + 1, idx] = bonds
    return h


def coupling_matrix(params: ArrayParams) -> np.ndarray:
    """Off-diagonal SSH coupling matrix D (no on-site terms)."""
    h = build_hamiltonian(params)
    np.fill_diagonal(h, 0.0)
    return h


# ---------------------------------------------------------------------------
# numeric eigenmodes


@dataclass(frozen=True, eq=False)
class EigenMode:
    index: int
    energy: float
    amplitudes: np.ndarray
    parity: Parity
    mode_class: ModeClass
    coupling: float

    @property
    def n_cells(self) -> int:
        return self.amplitudes.size // 2


def fix_phase(vec: np.ndarray, reverse: bool = False, tol: float = PHASE_TOL) -> np.ndarray:
    """Flip ``vec`` so its first significant component is positive.

    Components smaller than ``tol * max|vec|`` are skipped. With
    ``reverse=True`` the scan starts at the last site.
    """
    v = np.asarray(vec, dtype=float)
    mag = np.abs(v)
    big = np.nonzero(mag > tol * mag.max())[0]
    if big.size == 0:
        return v.copy()
    first = big[-1] if reverse else big[0]
    return -v if v[first] < 0 else v.copy()


def mode_parity(vec: np.ndarray, tol: float = PARITY_TOL) -> Parity:
    mirrored = vec[::-1]
    if np.max(np.abs(vec - mirrored)) < tol:
        return Parity.EVEN
    if np.max(np.abs(vec + mirrored)) < tol:
        return Parity.ODD
    return Parity.NONE


def classify_mode(mode, params: ArrayParams, tol: float = PARITY_TOL) -> tuple[Parity, ModeClass]:
    """Parity tag and edge/bulk class of a normalized mode.

    ``mode`` may be an :class:`EigenMode` or a pair ``(energy, amplitudes)``.
    A mode is an edge mode when it lies inside the half gap ``(t2 - t1) / 2``
    around the band centre. Edge modes without a definite parity are
    labelled left or right by their sublattice weight.
    """
    if isinstance(mode, EigenMode):
        energy, vec = mode.energy, mode.amplitudes
    else:
        energy, vec = mode
        vec = np.asarray(vec, dtype=float)
    parity = mode_parity(vec, tol)
    detuning = energy - params.reference_freq
    half_gap = 0.5 * (params.t2 - params.t1)
    if half_gap > 0 and abs(detuning) < half_gap:
        if parity is Parity.EVEN:
            return parity, ModeClass.EDGE_HYBRID_EVEN
        if parity is Parity.ODD:
            return parity, ModeClass.EDGE_HYBRID_ODD
        a_weight = float(np.sum(vec[0::2] ** 2))
        return parity, ModeClass.EDGE_LEFT if a_weight >= 0.5 else ModeClass.EDGE_RIGHT
    return parity, ModeClass.BULK_LOWER if detuning < 0 else ModeClass.BULK_UPPER


def _localize_pair(h: np.ndarray, vecs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Rotate an unresolved mid-gap pair onto sublattice-polarized states.

    Returns ``(energies, vectors)`` with the A-polarized (left) state first.
    """
    sublattice = np.where(np.arange(vecs.shape[0]) % 2 == 0, 1.0, -1.0)
    proj = vecs.T @ (sublattice[:, None] * vecs)
    _, u = np.linalg.eigh(proj)
    rotated = vecs @ u[:, ::-1]
    energies = np.einsum("ij,ik,kj->j", rotated, h, rotated)
    return energies, rotated


def eigensystem(
    h: np.ndarray,
    params: ArrayParams,
    hybridization_tol: float = HYBRIDIZATION_TOL,
    parity_tol: float = PARITY_TOL,
) -> list[EigenMode]:
    """Orthonormal eigenmodes of ``h`` sorted by energy, indexed from 1.

    When the mid-gap pair is split by less than ``hybridization_tol * t0``
    the two states are numerically degenerate; they are rotated onto the
    left/right localized basis so that the output does not depend on how
    the eigensolver happened to mix them.
    """
    h = np.asarray(h, dtype=float)
    if h.shape != (params.n_sites, params.n_sites):
        raise DomainError(f"Hamiltonian shape {h.shape} does not match {params.n_sites} sites")
    if not np.allclose(h, h.T, rtol=0, atol=1e-12 * max(1.0, np.abs(h).max())):
        raise DomainError("Hamiltonian must be symmetric")
    shift = float(np.mean(np.diag(h)))
    try:
        w, v = scipy.linalg.eigh(h - shift * np.eye(h.shape[0]))
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"eigensolver failed: {exc}") from exc
    w = w + shift

    reverse = np.zeros(w.size, dtype=bool)
    half_gap = 0.5 * (params.t2 - params.t1)
    edge = np.nonzero(np.abs(w - params.reference_freq) < half_gap)[0] if half_gap > 0 else []
    if len(edge) == 2 and abs(w[edge[1]] - w[edge[0]]) <= hybridization_tol * params.t0:
        w[edge], v[:, edge] = _localize_pair(h, v[:, edge])
        reverse[edge[1]] = True

    modes = []
    for j in range(w.size):
        vec = fix_phase(v[:, j], reverse=reverse[j])
        vec.setflags(write=False)
        parity, cls = classify_mode((w[j], vec), params, parity_tol)
        modes.append(EigenMode(j + 1, float(w[j]), vec, parity, cls, float(vec.sum())))
    return modes


def modes_matrix(modes: Sequence[EigenMode]) -> tuple[np.ndarray, np.ndarray]:
    """Stack modes into ``(energies, V)`` with eigenvectors as columns."""
    return np.array([m.energy for m in modes]), np.column_stack([m.amplitudes for m in modes])


def edge_modes(modes: Sequence[EigenMode]) -> list[EigenMode]:
    return [m for m in modes if m.mode_class.is_edge]


def edge_splitting(modes: Sequence[EigenMode]) -> Optional[float]:
    """Energy splitting of the mid-gap pair, or None without exactly two edge modes."""
    edges = edge_modes(modes)
    if len(edges) != 2:
        return None
    return abs(edges[1].energy - edges[0].energy)


def coupling_coefficient(mode: EigenMode) -> float:
    """Cavity coupling coefficient: sum of all site amplitudes."""
    return float(np.sum(mode.amplitudes))


def rescaling_factor(mode: EigenMode, n_cells: Optional[int] = None) -> float:
    n = mode.n_cells if n_cells is None else n_cells
    return coupling_coefficient(mode) / math.sqrt(2 * n)


# ---------------------------------------------------------------------------
# analytic states (topological phase only)


@dataclass(frozen=True)
class BulkMomentum:
    tau: int
    k: float
    band: Band = Band.LOWER


def phi_of_k(k, t1: float, t2: float):
    """Phase ``arccot(t1 / (t2 sin k) + cot k)`` on the branch (0, pi).

    Written as ``atan2(t2 sin k, t1 + t2 cos k)``, which is continuous where
    the cotangent form blows up. Accepts scalars or arrays.
    """
    k_arr = np.asarray(k, dtype=float)
    if not t2 > 0:
        raise DomainError(f"t2 must be positive, got {t2}")
    if np.any(k_arr <= 0) or np.any(k_arr >= math.pi):
        raise DomainError("k must lie strictly inside (0, pi)")
    out = np.arctan2(t2 * np.sin(k_arr), t1 + t2 * np.cos(k_arr))
    return float(out) if out.ndim == 0 else out


def _dphi_dk(k: float, t1: float, t2: float) -> float:
    return t2 * (t2 + t1 * math.cos(k)) / (t1 * t1 + t2 * t2 + 2 * t1 * t2 * math.cos(k))


def quantization_residual(k, tau: int, n_cells: int, t1: float, t2: float):
    """``k (N + 1) - phi(k) - tau pi``; zero at an allowed bulk momentum."""
    return np.asarray(k) * (n_cells + 1) - phi_of_k(k, t1, t2) - tau * math.pi


def _require_topological(params: ArrayParams) -> None:
    if not params.t1 < params.t2:
        raise UnsupportedRegimeError(
            f"analytic edge/bulk states need t1 < t2 (topological phase); got t1={params.t1}, t2={params.t2}"
        )


def bulk_momenta(params: ArrayParams, tol: float = 1e-10) -> list[BulkMomentum]:
    """Lower-band momenta solving the quantization condition, tau = 1..N-1.

    Root ``tau`` is bracketed by ``[tau, tau + 1] * pi / (N + 1)``, where the
    residual goes from ``-phi < 0`` to ``pi - phi > 0``.
    """
    _require_topological(params)
    n, t1, t2 = params.n_cells, params.t1, params.t2
    out = []
    for tau in range(1, n):
        a = tau * math.pi / (n + 1)
        b = (tau + 1) * math.pi / (n + 1)

        def f(k, tau=tau):
            return k * (n + 1) - phi_of_k(k, t1, t2) - tau * math.pi

        def fp(k):
            return (n + 1) - _dphi_dk(k, t1, t2)

        try:
            k = safeguarded_newton(f, a, b, fp)
        except ConvergenceError:
            k = math.nan
        if not (math.isfinite(k) and abs(f(k)) < tol):
            k = _scan_root(f, a, b)
        out.append(BulkMomentum(tau, k, Band.LOWER))
    return out


def _scan_root(f, a: float, b: float, n: int = 10001) -> float:
    brackets = sign_change_brackets(np.vectorize(f), a + 1e-14, b - 1e-14, n)
    if not brackets:
        raise ConvergenceError(f"no quantization root in [{a}, {b}]")
    lo, hi = brackets[0]
    return safeguarded_newton(f, lo, hi, max_iter=200)


def mode_momentum(params: ArrayParams, j: int) -> BulkMomentum:
    """Momentum of bulk mode ``j`` (1-based, energy order).

    Lower band j in [1, N-1] uses tau = j; upper band j in [N+2, 2N] mirrors
    the lower set with tau = 2N + 1 - j.
    """
    n = params.n_cells
    lower = bulk_momenta(params)
    if 1 <= j <= n - 1:
        return lower[j - 1]
    if n + 2 <= j <= 2 * n:
        km = lower[2 * n + 1 - j - 1]
        return BulkMomentum(km.tau, km.k, Band.UPPER)
    raise DomainError(f"mode {j} is not a bulk mode of a {n}-cell array")


def analytic_bulk_state(params: ArrayParams, km: BulkMomentum) -> np.ndarray:
    """Normalized standing-wave bulk state for momentum ``km``."""
    _require_topological(params)
    i = np.arange(1, params.n_cells + 1)
    ph = phi_of_k(km.k, params.t1, params.t2)
    sign = -1.0 if km.band is Band.LOWER else 1.0
    vec = np.empty(params.n_sites)
    vec[0::2] = np.sin(i * km.k - ph)
    vec[1::2] = sign * np.sin(i * km.k)
    return fix_phase(vec / np.linalg.norm(vec))


def analytic_bulk_coupling(params: ArrayParams, km: BulkMomentum) -> float:
    """Closed-form coupling of an even-parity bulk mode.

    Mirror symmetry makes the B-sublattice sum equal the A-sublattice sum,
    so the coupling is ``2 sum_i sin(i k - phi(k)) / norm``. The norm of the
    standing wave is close to sqrt(N) (not sqrt(2N)); it is evaluated exactly.
    """
    i = np.arange(1, params.n_cells + 1)
    ph = phi_of_k(km.k, params.t1, params.t2)
    a = np.sin(i * km.k - ph)
    norm = math.sqrt(float(np.sum(a**2 + np.sin(i * km.k) ** 2)))
    return 2.0 * float(np.sum(a)) / norm


def edge_normalization(params: ArrayParams) -> float:
    """Finite geometric sum sum_{i=1}^{N} (t1/t2)^(2(i-1))."""
    ratio2 = (params.t1 / params.t2) ** 2
    return float(np.sum(ratio2 ** np.arange(params.n_cells)))


def analytic_edge_states(params: ArrayParams) -> tuple[np.ndarray, np.ndarray]:
    """Left (A-sublattice) and right (B-sublattice) geometric edge states."""
    _require_topological(params)
    n = params.n_cells
    r = -params.t1 / params.t2
    norm = math.sqrt(edge_normalization(params))
    left = np.zeros(params.n_sites)
    right = np.zeros(params.n_sites)
    left[0::2] = r ** np.arange(n) / norm
    right[1::2] = r ** np.arange(n - 1, -1, -1) / norm
    return left, right


def edge_coupling_limit(phi: float, hybridized: bool = False) -> float:
    """Large-N edge coupling: sqrt(cos phi) localized, sqrt(2 cos phi) for the even hybrid."""
    if not 0.0 <= phi < 0.5 * math.pi:
        raise UnsupportedRegimeError("edge couplings exist only for 0 <= phi < pi/2")
    c = math.cos(phi)
    return math.sqrt(2.0 * c) if hybridized else math.sqrt(c)


# ---------------------------------------------------------------------------
# serialization


def amplitudes_to_csv(vec: np.ndarray, stream=None) -> str:
    """Write ``site_index,sublattice,amplitude`` rows; returns the text."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["site_index", "sublattice", "amplitude"])
    for n, value in enumerate(np.asarray(vec, dtype=float)):
        writer.writerow([n + 1, "AB"[n % 2], f"{value:.12g}"])
    text = buf.getvalue()
    if stream is not None:
        stream.write(text)
    return text
