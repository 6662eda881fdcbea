"""Superconducting-circuit maps from inductances and junction phases to couplings.

Inductances are in nH, currents in uA (so flux is in nH*uA = 1e-15 Wb),
angular frequencies in rad/us.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import AmbiguityError, DomainError, SingularityError, UnreachableCouplingError
from .roots import safeguarded_newton, sign_change_brackets

#: Magnetic flux quantum h/2e in nH*uA.
FLUX_QUANTUM = 2.067833848

_POLE_TOL = 1e-12


@dataclass(frozen=True)
class CouplerCircuit:
    """Junction coupler between two neighbouring qubits."""

    L_g: float
    L_0: float
    L_J: float
    qubit_freq: float

    def __post_init__(self):
        for name in ("L_g", "L_0", "L_J"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive")

    @property
    def c0(self) -> float:
        return self.L_0 / (2.0 * self.L_g)

    @property
    def monotone_flux_map(self) -> bool:
        """True when the flux-to-phase inversion is guaranteed unique (c0 > 1)."""
        return self.c0 > 1.0

    @property
    def critical_current(self) -> float:
        """Junction critical current I0 = Phi0 / (2 pi L_0), in uA."""
        return FLUX_QUANTUM / (2.0 * math.pi * self.L_0)


@dataclass(frozen=True)
class ResonatorCoupler:
    """Junction coupler between a qubit and the transmission-line resonator."""

    Lt_g: float
    Lt_0: float
    L_c: float
    cavity_freq: float
    delta_t: float

    def __post_init__(self):
        for name in ("Lt_0", "L_c"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive")
        if self.Lt_g < 0:
            raise DomainError("Lt_g must be nonnegative")


def _junction_denominator(L_g: float, L_0: float, delta: float) -> float:
    c = math.cos(delta)
    if abs(c) < 1e-15:  # cos(pi/2) evaluates to ~6e-17
        return math.inf
    return 2.0 * L_g + L_0 / c


def junction_coupling(circuit: CouplerCircuit, delta: float) -> float:
    """Qubit-qubit coupling through the junction at phase ``delta``.

    Open coupler (cos delta = 0) gives exactly zero.
    """
    den = _junction_denominator(circuit.L_g, circuit.L_0, delta)
    if math.isinf(den):
        return 0.0
    if abs(den) < _POLE_TOL * circuit.L_g:
        raise SingularityError(f"coupler pole at delta={delta}: 2 L_g + L_0/cos(delta) = 0")
    return -0.5 * circuit.qubit_freq * circuit.L_g**2 / ((circuit.L_J + circuit.L_g) * den)


def delta_for_coupling(circuit: CouplerCircuit, t_target: float, sign_branch: int = 1) -> float:
    """Junction phase realizing ``t_target``.

    ``sign_branch`` picks +delta or -delta; both give the same coupling.
    ``t_target = 0`` is the open coupler, delta = pi/2.
    """
    if sign_branch not in (1, -1):
        raise DomainError("sign_branch must be +1 or -1")
    if t_target == 0:
        return sign_branch * 0.5 * math.pi
    L_g, L_0, L_J = circuit.L_g, circuit.L_0, circuit.L_J
    inner = 2.0 * L_g / L_0 + circuit.qubit_freq * L_g**2 / (2.0 * t_target * L_0 * (L_J + L_g))
    if inner == 0:
        raise UnreachableCouplingError(f"coupling {t_target} needs an infinite junction inductance")
    arg = -1.0 / inner
    if not -1.0 <= arg <= 1.0:
        raise UnreachableCouplingError(f"coupling {t_target} unreachable: arccos argument {arg:.6g}")
    return sign_branch * math.acos(arg)


def delta_for_phi(circuit: CouplerCircuit, t0: float, phi: float, bond: str = "t1") -> float:
    """Phase for the ``t1 = t0 (1 - cos phi)`` or ``t2 = t0 (1 + cos phi)`` coupler."""
    sign = {"t1": -1.0, "t2": 1.0}.get(bond)
    if sign is None:
        raise DomainError("bond must be 't1' or 't2'")
    return delta_for_coupling(circuit, t0 * (1.0 + sign * math.cos(phi)))


def flux_for_delta(circuit: CouplerCircuit, delta: float) -> float:
    """Reduced external flux phi_ext = c0 delta + sin delta."""
    return circuit.c0 * delta + math.sin(delta)


def external_flux(circuit: CouplerCircuit, phi_ext: float) -> float:
    """Physical flux bias Phi_ext = phi_ext * 2 L_g I0, in nH*uA."""
    return phi_ext * 2.0 * circuit.L_g * circuit.critical_current


def delta_for_flux(circuit: CouplerCircuit, phi_ext: float, tol: float = 1e-12) -> float:
    """Invert ``c0 delta + sin delta = phi_ext`` for delta in [-pi, pi].

    Unique when c0 > 1. For c0 <= 1 the map can fold back; several roots
    raise :class:`AmbiguityError` carrying all of them.
    """
    c0 = circuit.c0
    sign = 1.0 if phi_ext >= 0 else -1.0
    target = abs(phi_ext)
    if c0 > 1.0 and target > c0 * math.pi + 1e-15:
        raise DomainError(f"phi_ext={phi_ext} outside the range reachable for |delta| <= pi")

    def f(d):
        return c0 * d + np.sin(d) - target

    def fp(d):
        return c0 + math.cos(d)

    if c0 > 1.0:
        root = safeguarded_newton(f, 0.0, math.pi, fp, ftol=tol * 1e-3)
        return sign * root
    brackets = sign_change_brackets(f, 0.0, math.pi, 4001)
    roots = sorted({round(safeguarded_newton(f, a, b, fp), 13) for a, b in brackets})
    if not roots:
        raise DomainError(f"no phase realizes phi_ext={phi_ext}")
    if len(roots) > 1:
        raise AmbiguityError(f"c0={c0:.4g} <= 1 gives {len(roots)} phases for phi_ext={phi_ext}", [sign * r for r in roots])
    return sign * roots[0]


def coupler_qubit_effective_coupling(t_AB: float, t_A: float, delta0: float) -> float:
    """Direct coupling plus the virtual exchange through a detuned coupler qubit."""
    if delta0 == 0:
        raise SingularityError("coupler qubit resonant with the array qubits (delta0 = 0)")
    if abs(t_A / delta0) > 0.3:
        warnings.warn(f"|t_A/delta0| = {abs(t_A / delta0):.3g} > 0.3: dispersive elimination is questionable", stacklevel=2)
    return t_AB + t_A**2 / delta0


def effective_mutual_inductance(rc: ResonatorCoupler) -> float:
    den = _junction_denominator(rc.Lt_g, rc.Lt_0, rc.delta_t)
    if math.isinf(den):
        return 0.0
    if abs(den) < _POLE_TOL * max(rc.Lt_g, rc.Lt_0):
        raise SingularityError(f"resonator-coupler pole at delta_t={rc.delta_t}")
    return rc.Lt_g**2 / den


def qubit_resonator_coupling(rc: ResonatorCoupler, qubit_freq: float) -> float:
    """Qubit-resonator coupling g in the harmonic, weak-coupling limit.

    For cos(delta_t) < 0 the junction inductance is negative and the
    qubit-branch inductance can change sign; the magnitude of the inductance
    product is used under the square root so that g stays real and its sign
    follows -sign(M).
    """
    m = effective_mutual_inductance(rc)
    if m == 0.0:
        return 0.0
    L_1A = rc.Lt_0 / math.cos(rc.delta_t)
    prod = (rc.Lt_g + L_1A) * (rc.Lt_g + rc.L_c)
    if prod == 0:
        raise SingularityError("qubit branch inductance vanishes")
    return -0.5 * m * math.sqrt(qubit_freq * rc.cavity_freq / abs(prod))


class FrequencyShifts(NamedTuple):
    delta_omega: float
    delta_omega_interior: float
    delta_g: float


def frequency_shifts(t: float, t0: float, g0: float, qubit_freq: float) -> FrequencyShifts:
    """Coupler-induced qubit shift -t, interior shift -2 t0 and coupling change -t0 g0 / omega0."""
    return FrequencyShifts(-t, -2.0 * t0, -t0 * g0 / qubit_freq)


def array_frequency_shifts(n_cells: int, t1: float, t2: float) -> np.ndarray:
    """Per-qubit shift in an open chain: minus the sum of the adjacent coupler strengths."""
    n = 2 * n_cells
    shifts = np.zeros(n)
    bonds = np.where(np.arange(n - 1) % 2 == 0, t1, t2)
    shifts[:-1] -= bonds
    shifts[1:] -= bonds
    return shifts
