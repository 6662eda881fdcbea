"""Reproduction checks with the reference parameter sets.

Each ``check_*`` function returns a :class:`CriterionResult`; :func:`run_all`
collects them and :func:`format_report` renders one line per check.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import circuit, dispersive, lattice, oracle, scattering, spectroscopy
from .units import GHZ, KHZ, MHZ

# ---------------------------------------------------------------------------
# reference parameter sets (linear units noted next to each value)

#: Reference rates: omega0/2pi = 6 GHz, t0/2pi = 100 MHz, kappa/2pi = 10 MHz, gamma/2pi = 20 kHz, g0/2pi = 5 MHz.
QUBIT_FREQ = 6.0 * GHZ
T0 = 100.0 * MHZ
G0 = 5.0 * MHZ
KAPPA = 10.0 * MHZ
GAMMA = 20.0 * KHZ

#: Waveguide transport rates in units of Gamma_L.
GAMMA_L = 0.15
GAMMA_R = 5e-4

#: Reference coupler circuit.
COUPLER = circuit.CouplerCircuit(L_g=0.25, L_0=0.566, L_J=8.34, qubit_freq=6.0 * GHZ)


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0


def _array(n_cells: int, phi: float, t0: float = T0, gamma: float = GAMMA) -> lattice.ArrayParams:
    return lattice.ArrayParams(n_cells, QUBIT_FREQ, t0, phi, qubit_decays=gamma)


# ---------------------------------------------------------------------------
# 1-2: coupling coefficients


def check_coupling_coefficients() -> CriterionResult:
    arr = _array(18, math.pi / 5)
    modes = lattice.eigensystem(lattice.build_hamiltonian(arr), arr)
    xi = np.array([m.coupling for m in modes])
    odd_bulk = [m for m in modes if not m.mode_class.is_edge and m.index % 2 == 1]
    max_odd = max(abs(m.coupling) for m in odd_bulk)
    target = math.sqrt(math.cos(math.pi / 5))
    e18, e19 = xi[17], xi[18]
    parseval = float(np.sum(xi**2))
    ok = (
        max_odd < 1e-8
        and abs(e18 - target) < 1e-2
        and abs(e18 - e19) < 1e-6
        and abs(parseval - 36) < 1e-9
    )
    detail = (
        f"max|xi_odd bulk|={max_odd:.2e}, xi18={e18:.8f}, xi19={e19:.8f}, "
        f"sqrt(cos pi/5)={target:.8f}, sum xi^2={parseval:.12f}"
    )
    return CriterionResult(1, "coupling coefficients N=18", ok, detail)


def check_edge_coupling_law(n_phi: int = 46) -> CriterionResult:
    phis = np.linspace(0.0, 0.45 * math.pi, n_phi)
    worst_edge = 0.0
    for phi in phis:
        arr = _array(78, float(phi))
        modes = lattice.eigensystem(lattice.build_hamiltonian(arr), arr)
        for m in lattice.edge_modes(modes):
            target = lattice.edge_coupling_limit(float(phi), m.mode_class is lattice.ModeClass.EDGE_HYBRID_EVEN)
            if m.mode_class is lattice.ModeClass.EDGE_HYBRID_ODD:
                err = abs(m.coupling)
            else:
                err = abs(m.coupling - target)
            worst_edge = max(worst_edge, err)
    worst_even = worst_odd = 0.0
    n_hybrid = 0
    for phi in phis:
        arr = _array(6, float(phi))
        modes = lattice.eigensystem(lattice.build_hamiltonian(arr), arr)
        cls = {m.mode_class: m for m in modes}
        if lattice.ModeClass.EDGE_HYBRID_EVEN in cls and lattice.ModeClass.EDGE_HYBRID_ODD in cls:
            n_hybrid += 1
            even = cls[lattice.ModeClass.EDGE_HYBRID_EVEN].coupling
            worst_even = max(worst_even, abs(even - math.sqrt(2 * math.cos(phi))))
            worst_odd = max(worst_odd, abs(cls[lattice.ModeClass.EDGE_HYBRID_ODD].coupling))
    ok = worst_edge < 1e-3 and n_hybrid > 0 and worst_even < 1e-2 and worst_odd < 1e-6
    detail = (
        f"N=78 max|xi_edge - sqrt(cos phi)|={worst_edge:.2e}; N=6 hybridized at {n_hybrid}/{n_phi} phi, "
        f"max even err={worst_even:.2e}, max|xi_odd|={worst_odd:.2e}"
    )
    return CriterionResult(2, "edge coupling law", ok, detail)


# ---------------------------------------------------------------------------
# 3-4: spectroscopy


def rabi_setup(phi: float = 0.2 * math.pi, n_cells: int = 18):
    arr = _array(n_cells, phi)
    cav = spectroscopy.CavityParams(QUBIT_FREQ, KAPPA, spectroscopy.coupling_preset("homogeneous", arr.n_sites, G0))
    drives = QUBIT_FREQ + MHZ * np.linspace(-30.0, 30.0, 6001)
    return arr, cav, drives


def check_rabi_splitting() -> CriterionResult:
    phi = 0.2 * math.pi
    arr, cav, drives = rabi_setup(phi)
    _, trans = spectroscopy.reflection_spectrum(arr, cav, drives)
    peaks = spectroscopy.find_rabi_peaks(drives, trans, phi, G0, KAPPA, GAMMA)
    expected = 2 * 1.27 * G0
    rel = abs(peaks.splitting - expected) / expected
    ok = peaks.resolvable and rel < 0.10
    detail = (
        f"peaks at {[round((p - QUBIT_FREQ) / MHZ, 3) for p in peaks.positions]} MHz, "
        f"splitting={peaks.splitting / MHZ:.3f} MHz vs 2*1.27*g0={expected / MHZ:.3f} MHz (rel {rel:.3f})"
    )
    return CriterionResult(3, "edge vacuum Rabi splitting", ok, detail)


def disorder_ensemble(eps: float = 2.0 * MHZ, seeds=range(10), phi: float = 0.2 * math.pi):
    """Per-seed ``(seed, resolvable, splitting, T(omega0))`` plus the clean-chain T(omega0)."""
    arr, cav, drives = rabi_setup(phi)
    clean_t = spectroscopy.reflection_spectrum(arr, cav, [QUBIT_FREQ])[1][0]
    rows = []
    for seed in seeds:
        sample = spectroscopy.disorder_sample(arr, eps, seed)
        _, trans = spectroscopy.reflection_spectrum(sample, cav, drives)
        peaks = spectroscopy.find_rabi_peaks(drives, trans)
        t_center = spectroscopy.reflection_spectrum(sample, cav, [QUBIT_FREQ])[1][0]
        rows.append((seed, peaks.resolvable, peaks.splitting, float(t_center)))
    return rows, float(clean_t)


def check_disorder_robustness() -> CriterionResult:
    rows, clean_t = disorder_ensemble()
    n_res = sum(r[1] for r in rows)
    n_flag = sum(r[3] > 10 * clean_t for r in rows)
    ok = n_res >= 9 and n_flag >= len(rows) / 2
    detail = (
        f"resolvable {n_res}/{len(rows)}; central transparency (T(w0) > 10x clean {clean_t:.1e}) "
        f"in {n_flag}/{len(rows)}"
    )
    return CriterionResult(4, "disorder robustness", ok, detail)


# ---------------------------------------------------------------------------
# 5: oracle


def oracle_system(photon_cutoff: int = 2) -> oracle.TruncatedSystem:
    """Single dimer with the reference rates and the first two entries of its coupling pattern."""
    arr = _array(1, 0.25 * math.pi)
    g = spectroscopy.coupling_preset("alternating-sign-8", 8, G0)[:2]
    cav = spectroscopy.CavityParams(QUBIT_FREQ, KAPPA, g, drive_freq=QUBIT_FREQ, drive_strength=KAPPA / 100)
    return oracle.TruncatedSystem(arr, cav, photon_cutoff)


def oracle_grid() -> np.ndarray:
    return QUBIT_FREQ + np.linspace(-2 * T0, 2 * T0, 41)


def check_oracle() -> CriterionResult:
    rows = oracle.agreement_sweep(oracle_system(), oracle_grid())
    err = max(r.error for r in rows)
    shift = max(r.eta_shift for r in rows)
    ok = err < 1e-3 and shift < 1e-4
    detail = f"max|R_lin - R_oracle|={err:.2e} on 41 points, eta-halving shift={shift:.2e}, cutoff doubling ok"
    return CriterionResult(5, "linearized vs master equation", ok, detail)


# ---------------------------------------------------------------------------
# 6-7: dispersive dynamics


def rabi_period(n_cells: int, phi: float = 0.1 * math.pi, t0: float = T0, basis: str = "qubits"):
    arr = _array(n_cells, phi, t0=t0, gamma=0.0)
    disp = dispersive.DispersiveParams(G0, 10.0 * G0)
    if basis == "qubits":
        h = dispersive.effective_hamiltonian_qubits(arr, disp)
    else:
        modes = lattice.eigensystem(lattice.build_hamiltonian(arr), arr)
        h = dispersive.modes_to_sites(dispersive.effective_hamiltonian_modes(arr, disp, modes), modes)
    trace = dispersive.evolve_excitation(h, 1, np.linspace(0.0, 2.5, 5001))
    return dispersive.measure_oscillation_period(trace, 1)


def check_edge_rabi_period() -> CriterionResult:
    period, j = rabi_period(6)
    j_target = 0.48 * MHZ
    periods = {n: rabi_period(n)[1] for n in (6, 10, 14)}
    spread = (max(periods.values()) - min(periods.values())) / periods[6]
    ok = abs(period - 1.04) / 1.04 < 0.05 and abs(j - j_target) / j_target < 0.05 and spread < 0.05
    detail = (
        f"T={period:.4f} us (1.04), J={j / MHZ:.4f}*2pi MHz (0.48), "
        f"J(N=6,10,14)={[round(float(v) / MHZ, 4) for v in periods.values()]} spread {spread:.3f}"
    )
    return CriterionResult(6, "edge-state Rabi period", ok, detail)


def check_bandgap_influence() -> CriterionResult:
    phi = 0.1 * math.pi
    _, j = rabi_period(6, phi, t0=10.0 * MHZ)
    bound = dispersive.edge_coupling_strength(phi, G0, 10.0 * G0)
    ok = j < bound
    detail = f"J(t0=10 MHz)={j / MHZ:.4f}*2pi MHz < cos(phi) g0^2/Delta0={bound / MHZ:.4f}*2pi MHz"
    return CriterionResult(7, "bandgap influence", ok, detail)


# ---------------------------------------------------------------------------
# 8: scattering


def check_scattering() -> CriterionResult:
    sp0 = scattering.ScatteringParams(0.0, GAMMA_L, GAMMA_R)
    t0 = abs(scattering.transmission_amplitude(0.0, sp0)) ** 2
    ok0 = abs(t0 - (0.15 / 1.15) ** 2) < 1e-10
    eit = scattering.classify_transparency(scattering.ScatteringParams(0.035, GAMMA_L, GAMMA_R))
    ats = scattering.classify_transparency(scattering.ScatteringParams(0.075, GAMMA_L, GAMMA_R))
    opened = eit.transmission_at_zero > t0
    ok_regimes = eit.regime is scattering.Transparency.INTERFERENCE and ats.regime is scattering.Transparency.SPLITTING
    ok_distance = eit.dip_distance is not None and eit.dip_distance < eit.two_j
    ok = ok0 and opened and ok_regimes and ok_distance
    detail = (
        f"|t(0)|^2(J=0)={t0:.12f}; J=0.035: |t(0)|^2={eit.transmission_at_zero:.4f}, {eit.regime.value}, "
        f"dip distance={eit.dip_distance:.5f} vs 2J={eit.two_j:.5f}; J=0.075: {ats.regime.value}"
    )
    return CriterionResult(8, "waveguide scattering", ok, detail)


# ---------------------------------------------------------------------------
# 9: circuit


def check_circuit_map(n_phi: int = 181) -> CriterionResult:
    lo, hi = math.inf, -math.inf
    worst_trip = 0.0
    for phi in np.linspace(0.0, math.pi, n_phi):
        for bond in ("t1", "t2"):
            d = circuit.delta_for_phi(COUPLER, T0, float(phi), bond)
            lo, hi = min(lo, d), max(hi, d)
            back = circuit.delta_for_flux(COUPLER, circuit.flux_for_delta(COUPLER, d))
            worst_trip = max(worst_trip, abs(back - d))
    dg = circuit.frequency_shifts(T0, T0, G0, QUBIT_FREQ).delta_g
    ok = lo >= 0.5 * math.pi - 1e-12 and hi <= 0.9 * math.pi and worst_trip < 1e-10 and abs(dg / MHZ + 0.083) < 5e-4
    detail = (
        f"delta in [{lo / math.pi:.4f}, {hi / math.pi:.4f}] pi, flux round trip {worst_trip:.1e}, "
        f"dg={dg / MHZ:.5f}*2pi MHz"
    )
    return CriterionResult(9, "circuit map", ok, detail)


# ---------------------------------------------------------------------------
# 10: property spot checks


def check_properties(seed: int = 0) -> CriterionResult:
    rng = np.random.default_rng(seed)
    fails = []
    for n in (3, 8, 18):
        phi = float(rng.uniform(0.0, math.pi))
        arr = _array(n, phi)
        h = lattice.build_hamiltonian(arr)
        w = np.linalg.eigvalsh(h) - QUBIT_FREQ
        if np.abs(np.sort(w) + np.sort(w)[::-1]).max() > 1e-9 * T0:
            fails.append(f"chiral N={n}")
        modes = lattice.eigensystem(h, arr)
        if abs(sum(m.coupling**2 for m in modes) - 2 * n) > 1e-9:
            fails.append(f"Parseval N={n}")
    arr = _array(10, 0.2 * math.pi)
    modes = lattice.eigensystem(lattice.build_hamiltonian(arr), arr)
    worst_overlap = 0.0
    for j in list(range(1, 10)) + list(range(12, 21)):
        vec = lattice.analytic_bulk_state(arr, lattice.mode_momentum(arr, j))
        worst_overlap = max(worst_overlap, 1 - abs(vec @ modes[j - 1].amplitudes))
    left, right = lattice.analytic_edge_states(arr)
    edge_vecs = np.column_stack([m.amplitudes for m in lattice.edge_modes(modes)])
    for v in (left, right):
        worst_overlap = max(worst_overlap, 1 - float(np.linalg.norm(edge_vecs.T @ v)))
    if worst_overlap > 1e-9:
        fails.append(f"overlap {worst_overlap:.1e}")
    grid = np.linspace(-10, 10, 10001)
    worst_t = worst_rt = 0.0
    for _ in range(20):
        sp = scattering.ScatteringParams(*rng.uniform(0, 1, 3), Gamma_L=float(rng.uniform(0.1, 2)))
        t = scattering.transmission_amplitude(grid, sp)
        worst_t = max(worst_t, float(np.abs(t).max()))
        chi = scattering.susceptibility_from_t(t)
        worst_rt = max(worst_rt, float(np.abs(1 / (1 - 1j * chi) - t).max()))
    if worst_t > 1 + 1e-12 or worst_rt > 1e-12:
        fails.append(f"|t|max={worst_t}, round trip {worst_rt:.1e}")
    arr = _array(6, 0.1 * math.pi, gamma=0.0)
    h = dispersive.effective_hamiltonian_qubits(arr, dispersive.DispersiveParams(G0, 10 * G0))
    tr = dispersive.evolve_excitation(h, 1, np.linspace(0, 3, 301))
    norm_err = float(np.abs(tr.norm - 1).max())
    if norm_err > 1e-12:
        fails.append(f"norm {norm_err:.1e}")
    detail = "all hold" if not fails else "; ".join(fails)
    detail += f" (overlap defect {worst_overlap:.1e}, |t|max {worst_t:.12f}, norm drift {norm_err:.1e})"
    return CriterionResult(10, "property spot checks", not fails, detail)


CHECKS: tuple[Callable[[], CriterionResult], ...] = (
    check_coupling_coefficients,
    check_edge_coupling_law,
    check_rabi_splitting,
    check_disorder_robustness,
    check_oracle,
    check_edge_rabi_period,
    check_bandgap_influence,
    check_scattering,
    check_circuit_map,
    check_properties,
)


def run_all(checks=CHECKS) -> list[CriterionResult]:
    out = []
    for check in checks:
        start = time.perf_counter()
        res = check()
        out.append(CriterionResult(res.number, res.name, res.passed, res.detail, time.perf_counter() - start))
    return out


def format_report(results) -> str:
    return "\n".join(
        f"[{'PASS' if r.passed else 'FAIL'}] {r.number:2d} {r.name}: {r.detail} ({r.seconds:.1f}s)" for r in results
    )
