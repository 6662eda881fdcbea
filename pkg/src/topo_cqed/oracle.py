"""Brute-force master-equation reference for tiny arrays.

The full qubit-cavity Hamiltonian (cavity truncated at ``photon_cutoff``
photons, qubits as two-level systems) is written in the frame rotating at
the drive frequency. Stationary states come from a direct sparse solve of
the vectorized Liouvillian with one row traded for the trace condition.
Column stacking is used throughout: vec(A rho B) = (B^T kron A) vec(rho).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import ConvergenceError, CutoffError, DomainError, IntegratorError
from .lattice import ArrayParams, build_hamiltonian
from .spectroscopy import CavityParams

MAX_CELLS = 2
MAX_DIM = 48
RESIDUAL_TOL = 1e-10
CUTOFF_TOL = 1e-4
PHYSICALITY_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class TruncatedSystem:
    """Array plus cavity, truncated to ``photon_cutoff`` photons.

    ``cavity.drive_freq`` sets the rotating frame (cavity frequency if
    unset) and ``cavity.drive_strength`` is the drive amplitude eta.
    """

    array: ArrayParams
    cavity: CavityParams
    photon_cutoff: int = 2
    _allow_large: bool = field(default=False, repr=False)

    def __post_init__(self):
        if self.array.n_cells > MAX_CELLS:
            raise DomainError(f"oracle supports at most {MAX_CELLS} unit cells")
        if self.photon_cutoff < 1:
            raise DomainError("photon_cutoff must be at least 1")
        if self.cavity.coupling_vector.size != self.array.n_sites:
            raise DomainError("coupling vector length must equal the number of qubits")
        if self.dim > MAX_DIM and not self._allow_large:
            raise DomainError(f"Hilbert dimension {self.dim} exceeds {MAX_DIM}")

    @property
    def dim(self) -> int:
        return (self.photon_cutoff + 1) * 2**self.array.n_sites

    @property
    def frame_freq(self) -> float:
        d = self.cavity.drive_freq
        return self.cavity.cavity_freq if d is None else d

    def with_cutoff(self, cutoff: int) -> "TruncatedSystem":
        return TruncatedSystem(self.array, self.cavity, cutoff, _allow_large=True)

    def with_drive(self, drive_freq=None, drive_strength=None) -> "TruncatedSystem":
        changes = {}
        if drive_freq is not None:
            changes["drive_freq"] = drive_freq
        if drive_strength is not None:
            changes["drive_strength"] = drive_strength
        return TruncatedSystem(self.array, self.cavity.replace(**changes), self.photon_cutoff, self._allow_large)


# ---------------------------------------------------------------------------
# operators


def _kron_all(ops):
    out = ops[0]
    for op in ops[1:]:
        out = sp.kron(out, op, format="csr")
    return sp.csr_matrix(out)


def operators(system: TruncatedSystem):
    """``(a, [sigma_minus_n])`` on the cavity-first tensor product space."""
    n_ph = system.photon_cutoff + 1
    n_q = system.array.n_sites
    a_c = sp.diags(np.sqrt(np.arange(1, n_ph)), 1, shape=(n_ph, n_ph))
    sm = sp.csr_matrix(np.array([[0.0, 1.0], [0.0, 0.0]]))
    eye2 = sp.identity(2, format="csr")
    a = _kron_all([a_c] + [eye2] * n_q)
    sigmas = []
    for k in range(n_q):
        ops = [sp.identity(n_ph, format="csr")] + [sm if j == k else eye2 for j in range(n_q)]
        sigmas.append(_kron_all(ops))
    return a, sigmas


def hamiltonian(system: TruncatedSystem):
    """Full Hamiltonian in the frame rotating at ``system.frame_freq``."""
    a, sm = operators(system)
    wl = system.frame_freq
    hq = build_hamiltonian(system.array)
    g = system.cavity.coupling_vector
    eta = system.cavity.drive_strength
    h = (system.cavity.cavity_freq - wl) * (a.T @ a)
    n = len(sm)
    for i in range(n):
        for j in range(n):
            c = hq[i, j] - (wl if i == j else 0.0)
            if c != 0.0:
                h = h + c * (sm[i].T @ sm[j])
        h = h + g[i] * (a.T @ sm[i] + sm[i].T @ a)
    if eta:
        h = h + 1j * eta * (a.T - a)
    return sp.csr_matrix(h, dtype=complex)


def collapse_operators(system: TruncatedSystem):
    """sqrt(rate) * L for the cavity and every qubit with nonzero decay."""
    a, sm = operators(system)
    ops = [np.sqrt(system.cavity.kappa) * a]
    for rate, s in zip(system.array.qubit_decays, sm):
        if rate > 0:
            ops.append(np.sqrt(rate) * s)
    return ops


def liouvillian(system: TruncatedSystem) -> sp.csr_matrix:
    """Sparse generator with d vec(rho)/dt = L vec(rho)."""
    h = hamiltonian(system)
    d = h.shape[0]
    eye = sp.identity(d, format="csr")
    lv = -1j * sp.kron(eye, h) + 1j * sp.kron(h.T, eye)
    for c in collapse_operators(system):
        cdc = (c.conj().T @ c).tocsr()
        lv = lv + sp.kron(c.conj(), c) - 0.5 * sp.kron(eye, cdc) - 0.5 * sp.kron(cdc.T, eye)
    return sp.csr_matrix(lv)


def _unvec(v: np.ndarray, d: int) -> np.ndarray:
    return v.reshape(d, d, order="F")


def check_physical(rho: np.ndarray, tol: float = PHYSICALITY_TOL) -> dict:
    """Hermiticity, trace and smallest eigenvalue of ``rho``."""
    herm = float(np.abs(rho - rho.conj().T).max())
    trace = complex(np.trace(rho))
    min_eig = float(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min())
    ok = herm < tol and abs(trace - 1) < tol and min_eig > -tol
    return {"hermiticity": herm, "trace": trace, "min_eigenvalue": min_eig, "physical": ok}


# ---------------------------------------------------------------------------
# stationary state


@dataclass(frozen=True, eq=False)
class SteadyState:
    rho: np.ndarray
    field: complex
    reflection: float
    residual: float


def _solve_stationary(system: TruncatedSystem) -> SteadyState:
    lv = liouvillian(system).tolil()
    d = system.dim
    rhs = np.zeros(d * d, dtype=complex)
    lv[0, :] = 0
    for i in range(d):
        lv[0, i * d + i] = 1.0
    rhs[0] = 1.0
    v = spla.spsolve(lv.tocsc(), rhs)
    if not np.all(np.isfinite(v)):
        raise ConvergenceError("stationary solve produced non-finite entries", [])
    rho = _unvec(v, d)
    rho = 0.5 * (rho + rho.conj().T)
    rho /= np.trace(rho).real
    residual = float(np.abs(liouvillian(system) @ rho.reshape(-1, order="F")).sum())
    if residual > RESIDUAL_TOL * max(1.0, system.cavity.kappa):
        raise ConvergenceError(f"stationary residual {residual:.3g} above tolerance", [residual])
    a, _ = operators(system)
    field = complex(np.sum((a @ rho).diagonal()))
    eta = system.cavity.drive_strength
    if eta == 0:
        refl = float("nan")
    else:
        refl = 1.0 - abs(system.cavity.kappa * field / (2.0 * eta)) ** 2
    return SteadyState(rho, field, refl, residual)


def lindblad_steady_state(system: TruncatedSystem, check_cutoff: bool = True) -> tuple[complex, float]:
    """Stationary ``(<a>, R)`` with R = 1 - |kappa <a> / (2 eta)|^2.

    Without qubits the driven cavity gives <a> = eta / (kappa/2 + i Dc), so
    this R is exactly the normalized cavity response of the linearized
    formula once the qubits respond linearly. ``check_cutoff`` repeats the
    solve with the photon cutoff doubled and raises :class:`CutoffError`
    if R moves by more than 1e-4.
    """
    if system.cavity.drive_strength <= 0:
        raise DomainError("the reflection needs a positive drive strength")
    ss = _solve_stationary(system)
    if check_cutoff:
        fine = _solve_stationary(system.with_cutoff(2 * system.photon_cutoff))
        shift = abs(fine.reflection - ss.reflection)
        if shift > CUTOFF_TOL:
            raise CutoffError(
                f"R shifts by {shift:.3g} when the photon cutoff is doubled",
                [ss.reflection, fine.reflection],
            )
    return ss.field, ss.reflection


def steady_state(system: TruncatedSystem) -> SteadyState:
    """Full stationary solution including the density matrix and residual."""
    return _solve_stationary(system)


# ---------------------------------------------------------------------------
# time evolution


@dataclass(frozen=True, eq=False)
class LindbladTrace:
    times: np.ndarray
    populations: np.ndarray
    photon_number: np.ndarray
    trace: np.ndarray
    min_eigenvalue: np.ndarray


def initial_state(system: TruncatedSystem, excited_site=None, photons: int = 0) -> np.ndarray:
    """Pure product state with ``photons`` cavity photons and qubit ``excited_site`` (1-based) excited."""
    n_ph = system.photon_cutoff + 1
    if not 0 <= photons < n_ph:
        raise DomainError("photon number exceeds the cutoff")
    n_q = system.array.n_sites
    idx = 0
    if excited_site is not None:
        if not 1 <= excited_site <= n_q:
            raise DomainError(f"excited_site must lie in [1, {n_q}]")
        idx = 1 << (n_q - excited_site)
    psi = np.zeros(system.dim, dtype=complex)
    psi[photons * 2**n_q + idx] = 1.0
    return np.outer(psi, psi.conj())


def lindblad_evolve(system: TruncatedSystem, rho0: np.ndarray, t_grid) -> LindbladTrace:
    """Populations <sigma+ sigma-> per qubit and <a+ a> versus time.

    Exact propagation exp(L t) vec(rho0) by Krylov-free truncated Taylor
    action (scipy's expm_multiply); physicality is checked at every output
    time and a trace drift beyond 1e-9 raises :class:`IntegratorError`.
    """
    times = np.asarray(t_grid, dtype=float).reshape(-1)
    if times.size == 0 or np.any(np.diff(times) < 0):
        raise DomainError("t_grid must be nonempty and nondecreasing")
    lv = sp.csc_matrix(liouvillian(system))
    d = system.dim
    v = np.asarray(rho0, dtype=complex).reshape(-1, order="F")
    a, sm = operators(system)
    pops, nph, tr, mins = [], [], [], []
    t_prev = 0.0
    for t in times:
        if t != t_prev:
            v = spla.expm_multiply(lv * (t - t_prev), v)
            t_prev = t
        if not np.all(np.isfinite(v)):
            raise IntegratorError(f"non-finite state at t={t}")
        rho = _unvec(v, d)
        pops.append([np.sum((s.T @ s @ rho).diagonal()).real for s in sm])
        nph.append(np.sum((a.T @ a @ rho).diagonal()).real)
        info = check_physical(rho)
        if abs(info["trace"] - 1) > PHYSICALITY_TOL:
            raise IntegratorError(f"trace drifted to {info['trace']:.12g} at t={t}")
        tr.append(info["trace"].real)
        mins.append(info["min_eigenvalue"])
    return LindbladTrace(times, np.array(pops), np.array(nph), np.array(tr), np.array(mins))


def single_excitation_hamiltonian(system: TruncatedSystem) -> np.ndarray:
    """(2N+1)-dimensional one-excitation block, cavity first, same rotating frame."""
    n = system.array.n_sites
    wl = system.frame_freq
    h = np.zeros((n + 1, n + 1))
    h[0, 0] = system.cavity.cavity_freq - wl
    h[0, 1:] = h[1:, 0] = system.cavity.coupling_vector
    h[1:, 1:] = build_hamiltonian(system.array) - wl * np.eye(n)
    return h


# ---------------------------------------------------------------------------
# agreement suite


@dataclass(frozen=True)
class AgreementRow:
    drive_freq: float
    r_linear: float
    r_oracle: float
    r_oracle_half_eta: float

    @property
    def error(self) -> float:
        return abs(self.r_linear - self.r_oracle)

    @property
    def eta_shift(self) -> float:
        return abs(self.r_oracle - self.r_oracle_half_eta)


def agreement_sweep(system: TruncatedSystem, drive_grid, check_cutoff: bool = True) -> list[AgreementRow]:
    """Linearized versus master-equation reflection on a drive grid, with eta halved as well."""
    from .spectroscopy import reflection_spectrum

    eta = system.cavity.drive_strength
    rows = []
    r_lin, _ = reflection_spectrum(system.array, system.cavity, drive_grid)
    for w, rl in zip(np.asarray(drive_grid, dtype=float), r_lin):
        s = system.with_drive(drive_freq=float(w))
        _, r1 = lindblad_steady_state(s, check_cutoff=check_cutoff)
        _, r2 = lindblad_steady_state(s.with_drive(drive_strength=0.5 * eta), check_cutoff=False)
        rows.append(AgreementRow(float(w), float(rl), r1, r2))
    return rows
