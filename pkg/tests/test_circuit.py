from __future__ import annotations

import math
import warnings

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from topo_cqed import circuit as cq
from topo_cqed.errors import AmbiguityError, ConvergenceError, DomainError, SingularityError, UnreachableCouplingError
from topo_cqed.roots import safeguarded_newton, sign_change_brackets
from topo_cqed.units import GHZ, MHZ

CC = cq.CouplerCircuit(L_g=0.25, L_0=0.566, L_J=8.34, qubit_freq=6.0 * GHZ)
T0 = 100.0 * MHZ


def test_circuit_validation_and_derived():
    with pytest.raises(DomainError):
        cq.CouplerCircuit(0.0, 1.0, 1.0, 1.0)
    assert CC.c0 == pytest.approx(1.132)
    assert CC.monotone_flux_map
    assert CC.critical_current == pytest.approx(cq.FLUX_QUANTUM / (2 * math.pi * 0.566))


def test_junction_coupling_formula_and_limits():
    d = 0.7 * math.pi
    expected = -0.5 * CC.qubit_freq * 0.25**2 / ((8.34 + 0.25) * (0.5 + 0.566 / math.cos(d)))
    assert cq.junction_coupling(CC, d) == pytest.approx(expected, rel=1e-14)
    assert cq.junction_coupling(CC, math.pi / 2) == 0.0
    assert abs(cq.junction_coupling(CC, math.pi / 2 + 1e-9)) < 1e-3
    # opposite sides of the open point give opposite signs
    assert cq.junction_coupling(CC, 0.4 * math.pi) * cq.junction_coupling(CC, 0.6 * math.pi) < 0
    # 2 L_g + L_0 / cos(delta) vanishes at cos(delta) = -1/2 when L_0 = L_g
    c2 = cq.CouplerCircuit(L_g=1.0, L_0=1.0, L_J=1.0, qubit_freq=1.0)
    with pytest.raises(SingularityError):
        cq.junction_coupling(c2, math.acos(-0.5))


def test_delta_range_fig_s2():
    ds = [cq.delta_for_phi(CC, T0, phi, b) for phi in np.linspace(0, math.pi, 181) for b in ("t1", "t2")]
    assert min(ds) >= 0.5 * math.pi - 1e-12
    assert max(ds) <= 0.9 * math.pi
    # frozen: the t2 branch tops out near 0.8795 pi at phi = 0
    assert cq.delta_for_phi(CC, T0, 0.0, "t2") / math.pi == pytest.approx(0.879484, abs=1e-5)
    assert cq.delta_for_phi(CC, T0, 0.0, "t1") == pytest.approx(math.pi / 2)


@settings(max_examples=60, deadline=None)
@given(d=st.floats(0.5 * math.pi + 1e-3, 0.9 * math.pi))
def test_coupling_round_trip(d):
    t = cq.junction_coupling(CC, d)
    back = cq.delta_for_coupling(CC, abs(t))
    assert back == pytest.approx(d, rel=1e-10)
    assert abs(cq.junction_coupling(CC, back)) == pytest.approx(abs(t), rel=1e-10)
    assert cq.delta_for_coupling(CC, abs(t), sign_branch=-1) == pytest.approx(-back)


def test_unreachable_coupling():
    with pytest.raises(UnreachableCouplingError):
        cq.delta_for_coupling(CC, 1e6 * MHZ)
    with pytest.raises(DomainError):
        cq.delta_for_coupling(CC, T0, sign_branch=0)
    with pytest.raises(DomainError):
        cq.delta_for_phi(CC, T0, 0.1, "t3")


def test_flux_map_monotone_and_round_trip():
    ds = np.linspace(0, math.pi, 2001)
    flux = np.array([cq.flux_for_delta(CC, d) for d in ds])
    assert np.all(np.diff(flux) > 0)
    assert cq.flux_for_delta(CC, 0.0) == 0.0
    for d in np.linspace(0.5 * math.pi, 0.9 * math.pi, 41):
        phi_ext = cq.flux_for_delta(CC, d)
        back = cq.delta_for_flux(CC, phi_ext)
        assert back == pytest.approx(d, abs=1e-10)
        assert abs(CC.c0 * back + math.sin(back) - phi_ext) < 1e-12
        assert cq.delta_for_flux(CC, -phi_ext) == pytest.approx(-d, abs=1e-10)
    assert cq.external_flux(CC, 1.0) == pytest.approx(2 * 0.25 * CC.critical_current)
    with pytest.raises(DomainError):
        cq.delta_for_flux(CC, 10.0)


def test_flux_map_ambiguity_when_c0_small():
    weak = cq.CouplerCircuit(L_g=1.0, L_0=0.1, L_J=1.0, qubit_freq=1.0)  # c0 = 0.05
    assert not weak.monotone_flux_map
    with pytest.raises(AmbiguityError) as info:
        cq.delta_for_flux(weak, 0.2)
    roots = info.value.roots
    assert len(roots) >= 2
    for r in roots:
        assert weak.c0 * r + math.sin(r) == pytest.approx(0.2, abs=1e-10)


def test_coupler_qubit_scheme():
    assert cq.coupler_qubit_effective_coupling(T0, 0.0, 5 * T0) == T0
    with pytest.warns(UserWarning):
        assert cq.coupler_qubit_effective_coupling(T0, 1.0, -2.0 / T0) == pytest.approx(0.5 * T0)
    phi = 0.3 * math.pi
    t_a2_over_d = -math.cos(phi) * T0
    delta0 = 20 * T0
    t_a = math.sqrt(abs(t_a2_over_d * delta0))
    assert cq.coupler_qubit_effective_coupling(T0, t_a, -delta0) == pytest.approx(T0 * (1 - math.cos(phi)))
    assert cq.coupler_qubit_effective_coupling(T0, t_a, delta0) == pytest.approx(T0 * (1 + math.cos(phi)))
    with pytest.raises(SingularityError):
        cq.coupler_qubit_effective_coupling(T0, 1.0, 0.0)
    with pytest.warns(UserWarning):
        cq.coupler_qubit_effective_coupling(T0, 1.0, 2.0)


def test_qubit_resonator_coupling_matches_mpmath():
    rc = cq.ResonatorCoupler(Lt_g=0.2, Lt_0=0.5, L_c=2.0, cavity_freq=7.0 * GHZ, delta_t=0.3 * math.pi)
    w0 = 6.0 * GHZ
    with mpmath.workdps(40):
        c = mpmath.cos(mpmath.mpf(0.3) * mpmath.pi)
        l1a = mpmath.mpf(0.5) / c
        m = mpmath.mpf(0.2) ** 2 / (2 * mpmath.mpf(0.2) + l1a)
        ref = -m / 2 * mpmath.sqrt(mpmath.mpf(w0) * 7.0 * GHZ / ((0.2 + l1a) * (0.2 + 2.0)))
    assert cq.qubit_resonator_coupling(rc, w0) == pytest.approx(float(ref), rel=1e-12)
    tiny = cq.ResonatorCoupler(Lt_g=0.0, Lt_0=0.5, L_c=2.0, cavity_freq=7.0 * GHZ, delta_t=0.3 * math.pi)
    assert cq.qubit_resonator_coupling(tiny, w0) == 0.0


def test_qubit_resonator_sign_flip_across_zero_crossing():
    rc = dict(Lt_g=0.2, Lt_0=0.5, L_c=2.0, cavity_freq=7.0 * GHZ)
    w0 = 6.0 * GHZ
    below = cq.qubit_resonator_coupling(cq.ResonatorCoupler(delta_t=0.45 * math.pi, **rc), w0)
    above = cq.qubit_resonator_coupling(cq.ResonatorCoupler(delta_t=0.55 * math.pi, **rc), w0)
    assert below * above < 0
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert np.isfinite(above)


def test_frequency_shifts():
    s = cq.frequency_shifts(T0, T0, 5 * MHZ, 6 * GHZ)
    assert s.delta_omega == -T0 and s.delta_omega_interior == -2 * T0
    assert s.delta_g / MHZ == pytest.approx(-0.083, abs=5e-4)
    assert cq.frequency_shifts(0.0, T0, 5 * MHZ, 6 * GHZ).delta_omega == 0.0
    shifts = cq.array_frequency_shifts(2, 1.0, 3.0)
    np.testing.assert_allclose(shifts, [-1.0, -4.0, -4.0, -1.0])
    # interior minus boundary equals minus the outer bond of the interior qubit
    assert shifts[1] - shifts[0] == -3.0


def test_root_helpers():
    r = safeguarded_newton(lambda x: x**3 - 2, 0.0, 2.0, lambda x: 3 * x**2)
    assert r == pytest.approx(2 ** (1 / 3), rel=1e-15)
    assert safeguarded_newton(math.cos, 0.0, 3.0) == pytest.approx(math.pi / 2)
    with pytest.raises(DomainError):
        safeguarded_newton(lambda x: x * x + 1, -1.0, 1.0)
    with pytest.raises(ConvergenceError):
        safeguarded_newton(lambda x: x - 0.3, 0.0, 1.0, max_iter=2, xtol=0.0)
    brackets = sign_change_brackets(np.sin, 0.5, 10.0, 1000)
    assert len(brackets) == 3
    assert sign_change_brackets(np.sin, 0.0, math.pi, 11)[0][0] == 0.0
