from __future__ import annotations

import math

import numpy as np
import pytest
from scipy.linalg import expm

from topo_cqed import acceptance
from topo_cqed import dispersive as dp
from topo_cqed import lattice as lt
from topo_cqed import oracle as orc
from topo_cqed import spectroscopy as sp
from topo_cqed.errors import CutoffError, DomainError, IntegratorError
from topo_cqed.units import GHZ, KHZ, MHZ

W0 = 6.0 * GHZ
T0 = 100.0 * MHZ
G0 = 5.0 * MHZ
KAPPA = 10.0 * MHZ


def dimer(g=(G0, G0), gamma=20 * KHZ, eta=KAPPA / 100, drive=W0, cavity=W0, kappa=KAPPA, phi=0.25 * math.pi):
    arr = lt.ArrayParams(1, W0, T0, phi, qubit_decays=gamma)
    cav = sp.CavityParams(cavity, kappa, np.array(g, dtype=float), drive_freq=drive, drive_strength=eta)
    return orc.TruncatedSystem(arr, cav)


def test_size_guards():
    arr = lt.ArrayParams(3, W0, T0, 0.2)
    with pytest.raises(DomainError):
        orc.TruncatedSystem(arr, sp.CavityParams(W0, KAPPA, np.ones(6)))
    arr = lt.ArrayParams(2, W0, T0, 0.2)
    cav = sp.CavityParams(W0, KAPPA, np.ones(4))
    assert orc.TruncatedSystem(arr, cav, 1).dim == 32
    assert orc.TruncatedSystem(arr, cav, 2).dim == 48
    with pytest.raises(DomainError):
        orc.TruncatedSystem(arr, cav, 3)
    assert orc.TruncatedSystem(arr, cav).with_cutoff(3).dim == 64
    with pytest.raises(DomainError):
        orc.TruncatedSystem(arr, sp.CavityParams(W0, KAPPA, np.ones(3)))
    with pytest.raises(DomainError):
        orc.TruncatedSystem(arr, cav, 0)


def test_operators_and_hamiltonian_hermitian():
    s = dimer()
    a, sm = orc.operators(s)
    # canonical commutator on states below the cutoff
    comm = (a @ a.T - a.T @ a).toarray()
    low = np.arange(s.dim) < 2 * 2**2
    np.testing.assert_allclose(comm[np.ix_(low, low)], np.eye(low.sum()))
    for x in sm:
        np.testing.assert_allclose((x @ a - a @ x).toarray(), 0)
    h = orc.hamiltonian(s).toarray()
    np.testing.assert_allclose(h, h.conj().T, atol=1e-9)


def test_empty_cavity_at_resonance_absorbs_everything():
    s = dimer(g=(0.0, 0.0))
    field, r = orc.lindblad_steady_state(s)
    assert field == pytest.approx(2 * s.cavity.drive_strength / KAPPA)
    # residual is photon truncation, of order (2 eta / kappa)^4
    assert r == pytest.approx(0.0, abs=1e-6)
    _, r_fine = orc.lindblad_steady_state(s.with_cutoff(5), check_cutoff=False)
    assert abs(r_fine) < 1e-12
    _, r_off = orc.lindblad_steady_state(s.with_drive(drive_freq=W0 + KAPPA / 2))
    assert r_off == pytest.approx(0.5, abs=1e-6)


def test_steady_state_is_physical():
    ss = orc.steady_state(dimer(drive=W0 + 0.3 * T0))
    info = orc.check_physical(ss.rho)
    assert info["physical"]
    assert ss.residual < 1e-10 * KAPPA
    assert 0.0 <= ss.reflection <= 1.0


def test_drive_required_for_reflection():
    with pytest.raises(DomainError):
        orc.lindblad_steady_state(dimer(eta=0.0))


def test_small_agreement_sweep():
    grid = W0 + T0 * np.array([-1.5, -0.7, -0.2, 0.0, 0.4, 1.2])
    rows = orc.agreement_sweep(acceptance.oracle_system(), grid)
    assert max(r.error for r in rows) < 1e-3
    assert max(r.eta_shift for r in rows) < 1e-4


def test_strong_drive_trips_cutoff_check():
    s = dimer(eta=3 * KAPPA, g=(0.0, 0.0))
    with pytest.raises(CutoffError):
        orc.lindblad_steady_state(s)


def test_evolution_matches_single_excitation_block():
    s = dimer(gamma=0.0, eta=0.0, kappa=1e-9, drive=W0 + 0.1 * T0, g=(20 * MHZ, -20 * MHZ))
    times = np.linspace(0, 0.02, 11)
    tr = orc.lindblad_evolve(s, orc.initial_state(s, excited_site=1), times)
    h1 = orc.single_excitation_hamiltonian(s)
    psi0 = np.zeros(3)
    psi0[1] = 1.0
    ref = np.array([np.abs(expm(-1j * h1 * t) @ psi0) ** 2 for t in times])
    np.testing.assert_allclose(tr.populations, ref[:, 1:], atol=1e-8)
    np.testing.assert_allclose(tr.photon_number, ref[:, 0], atol=1e-8)
    assert np.abs(tr.trace - 1).max() < 1e-12
    assert tr.min_eigenvalue.min() > -1e-9


def test_decay_reduces_excitation():
    s = dimer(gamma=1.0, eta=0.0)
    tr = orc.lindblad_evolve(s, orc.initial_state(s, excited_site=2), np.linspace(0, 2, 5))
    total = tr.populations.sum(axis=1) + tr.photon_number
    assert np.all(np.diff(total) < 0)
    np.testing.assert_allclose(tr.trace, 1, atol=1e-10)


def test_initial_state_and_time_grid_checks():
    s = dimer()
    rho = orc.initial_state(s, excited_site=1, photons=1)
    a, sm = orc.operators(s)
    assert np.trace((a.T @ a @ rho)).real == pytest.approx(1.0)
    assert np.trace((sm[0].T @ sm[0] @ rho)).real == pytest.approx(1.0)
    assert np.trace((sm[1].T @ sm[1] @ rho)).real == pytest.approx(0.0)
    with pytest.raises(DomainError):
        orc.initial_state(s, photons=3)
    with pytest.raises(DomainError):
        orc.initial_state(s, excited_site=3)
    with pytest.raises(DomainError):
        orc.lindblad_evolve(s, rho, [1.0, 0.5])
    with pytest.raises(IntegratorError):
        orc.lindblad_evolve(s, np.full_like(rho, np.nan), [0.0, 0.1])


def test_dispersive_dimer_against_oracle():
    disp = dp.DispersiveParams(G0, G0 / 0.05)
    cavity = W0 + disp.cavity_freq_offset
    s = dimer(g=(G0, G0), gamma=0.0, eta=0.0, kappa=1e-9, cavity=cavity, drive=cavity, phi=0.1 * math.pi)
    times = np.linspace(0, 0.1, 41)
    full = orc.lindblad_evolve(s, orc.initial_state(s, excited_site=1), times)
    eff = dp.evolve_excitation(dp.effective_hamiltonian_qubits(s.array, disp), 1, times)
    np.testing.assert_allclose(full.populations, eff.populations, atol=2e-2)
    assert full.photon_number.max() < 2 * 4 * 0.05**2
