"""Single-photon transport through a waveguide coupled to the left-edge qubit.

With the bulk ignored, the array acts as a three-level superatom: a ground
state and the two edge states, coupled to each other with strength ``J``.
All rates here are in units of the waveguide-induced decay ``Gamma_L``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
from scipy.signal import find_peaks

from .dispersive import DispersiveParams
from .errors import DegenerateDecompositionError, DomainError, SingularityError, UnsupportedRegimeError
from .lattice import ArrayParams, ModeClass, build_hamiltonian, eigensystem
from .spectroscopy import refine_extremum


@dataclass(frozen=True)
class ScatteringParams:
    """Superatom parameters; ``Gamma_L`` is the unit (1.0 after normalization)."""

    J: float
    gamma_L: float
    gamma_R: float
    Gamma_L: float = 1.0
    delta_p_offset: float = 0.0

    def __post_init__(self):
        if min(self.gamma_L, self.gamma_R) < 0 or self.Gamma_L < 0:
            raise DomainError("decay rates must be nonnegative")
        if self.J < 0:
            raise DomainError("J must be nonnegative")


def transmission_amplitude(delta_p, sp: ScatteringParams):
    """Complex single-photon transmission amplitude t(delta_p)."""
    d = np.asarray(delta_p, dtype=float)
    if sp.Gamma_L == 0:
        out = np.ones_like(d, dtype=complex)
        return complex(out) if out.ndim == 0 else out
    if sp.J == 0:
        # the right qubit decouples; dropping its factor avoids 0/0 when it is lossless
        out = (1j * d - 0.5 * sp.gamma_L) / (1j * d - 0.5 * (sp.gamma_L + sp.Gamma_L))
        return complex(out) if out.ndim == 0 else out
    right = 1j * d - 0.5 * sp.gamma_R
    num = (1j * d - 0.5 * sp.gamma_L) * right + sp.J**2
    den = (1j * d - 0.5 * (sp.gamma_L + sp.Gamma_L)) * right + sp.J**2
    out = num / den
    return complex(out) if out.ndim == 0 else out


def susceptibility_from_t(t):
    """chi = -i (t - 1) / t."""
    t_arr = np.asarray(t, dtype=complex)
    if np.any(t_arr == 0):
        raise SingularityError("susceptibility has a pole where t = 0")
    out = -1j * (t_arr - 1.0) / t_arr
    return complex(out) if out.ndim == 0 else out


def susceptibility(delta_p, sp: ScatteringParams):
    """Closed-form susceptibility Gamma_L (D + i gR/2) / (2 J^2 - 2 (D + i gL/2)(D + i gR/2))."""
    d = np.asarray(delta_p, dtype=float)
    b = d + 0.5j * sp.gamma_R
    out = sp.Gamma_L * b / (2 * sp.J**2 - 2 * (d + 0.5j * sp.gamma_L) * b)
    return complex(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# pole structure


class PeakSign(str, Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"


@dataclass(frozen=True)
class PoleDecomposition:
    poles: tuple
    residues: tuple
    peak_signs: tuple

    def evaluate(self, delta_p):
        d = np.asarray(delta_p, dtype=float)
        return sum(r / (d - p) for p, r in zip(self.poles, self.residues))

    def term(self, k: int, delta_p):
        return self.residues[k] / (np.asarray(delta_p, dtype=float) - self.poles[k])


def lorentzian_peak_value(pole: complex, residue: complex) -> float:
    """Dominant extremum of Im[r / (x - p)] over real x.

    With p = x0 - i y (y > 0) the two extrema of the imaginary part are
    (-Re r +/- |r|) / (2 y); the larger in magnitude is returned.
    """
    y = -pole.imag
    if y <= 0:
        raise DomainError("pole must lie in the lower half plane")
    hi = (-residue.real + abs(residue)) / (2 * y)
    lo = (-residue.real - abs(residue)) / (2 * y)
    return hi if abs(hi) >= abs(lo) else lo


def decompose_poles(sp: ScatteringParams, rel_tol: float = 1e-12) -> PoleDecomposition:
    """Partial fractions chi = sum r_k / (delta_p - p_k).

    chi = -(Gamma_L / 2) (D + i gR/2) / ((D + i gL/2)(D + i gR/2) - J^2); the
    poles solve D^2 + i (gL + gR)/2 D - gL gR / 4 - J^2 = 0.
    """
    a, b = 0.5 * sp.gamma_L, 0.5 * sp.gamma_R
    disc = np.sqrt(complex(4 * sp.J**2 - (a - b) ** 2))
    p_plus = 0.5 * (-1j * (a + b) + disc)
    p_minus = 0.5 * (-1j * (a + b) - disc)
    if abs(p_plus - p_minus) <= rel_tol * max(sp.Gamma_L, abs(p_plus), 1e-300):
        raise DegenerateDecompositionError(
            f"double pole at {p_plus:.6g} (exceptional point J = |gamma_L - gamma_R| / 4)"
        )
    poles = (complex(p_plus), complex(p_minus))
    residues = tuple(
        complex(-0.5 * sp.Gamma_L * (p + 1j * b) / (p - q)) for p, q in (poles, poles[::-1])
    )
    signs = []
    for p, r in zip(poles, residues):
        if abs(r) == 0:
            signs.append(None)
        else:
            signs.append(PeakSign.POSITIVE if lorentzian_peak_value(p, r) > 0 else PeakSign.NEGATIVE)
    return PoleDecomposition(poles, residues, tuple(signs))


class Transparency(str, Enum):
    INTERFERENCE = "Interference"
    SPLITTING = "Splitting"
    NONE = "None"


@dataclass(frozen=True)
class TransparencyReport:
    regime: Transparency
    dip_distance: Optional[float]
    resonance_splitting: float
    two_j: float
    transmission_at_zero: float


def absorption_dips(sp: ScatteringParams, span: float = 10.0, n: int = 200001) -> np.ndarray:
    """Positions of the local minima of |t|^2 on a uniform grid over [-span, span]."""
    d = np.linspace(-span, span, n)
    tt = np.abs(transmission_amplitude(d, sp)) ** 2
    idx, _ = find_peaks(-tt)
    return np.array([refine_extremum(d, tt, int(i))[0] for i in idx])


def classify_transparency(sp: ScatteringParams, span: Optional[float] = None) -> TransparencyReport:
    """Interference (opposite-sign Lorentzians) versus splitting (both positive).

    Also reports the distance between the two |t|^2 absorption dips and the
    resonance splitting 2 |Re p| of the pole pair, each to compare with 2J.
    At the exceptional point no sign pattern exists and the regime is None.
    """
    t0 = float(np.abs(transmission_amplitude(0.0, sp)) ** 2)
    if sp.J == 0:
        return TransparencyReport(Transparency.NONE, None, 0.0, 0.0, t0)
    if span is None:
        span = 4.0 * (sp.J + sp.gamma_L + sp.gamma_R + sp.Gamma_L)
    dips = absorption_dips(sp, span)
    dip_distance = float(dips.max() - dips.min()) if dips.size >= 2 else None
    try:
        dec = decompose_poles(sp)
    except DegenerateDecompositionError:
        # exceptional point: the two Lorentzians merge and no sign pattern exists
        return TransparencyReport(Transparency.NONE, dip_distance, 0.0, 2 * sp.J, t0)
    splitting = abs(dec.poles[0].real - dec.poles[1].real)
    signs = set(dec.peak_signs)
    if None in signs:
        regime = Transparency.NONE
    elif signs == {PeakSign.POSITIVE}:
        regime = Transparency.SPLITTING
    elif signs == {PeakSign.POSITIVE, PeakSign.NEGATIVE}:
        regime = Transparency.INTERFERENCE
    else:
        regime = Transparency.NONE
    return TransparencyReport(regime, dip_distance, splitting, 2 * sp.J, t0)


def superatom_from_system(
    array: ArrayParams,
    disp: DispersiveParams,
    Gamma_L: float,
    gamma_L: float,
    gamma_R: float,
) -> ScatteringParams:
    """Superatom parameters (in units of ``Gamma_L``) for a physical array.

    The edge-cavity couplings g_L, g_R are read off the numeric left/right
    edge modes, J = g_L g_R / delta0, and the probe detuning is offset by
    the Lamb shift g_L^2 / delta0 (returned in units of Gamma_L as well).
    """
    if not array.topological:
        raise UnsupportedRegimeError("the superatom reduction needs the topological phase (t1 < t2)")
    if not Gamma_L > 0:
        raise DomainError("Gamma_L must be positive")
    modes = eigensystem(build_hamiltonian(array), array)
    by_class = {m.mode_class: m for m in modes}
    if ModeClass.EDGE_LEFT in by_class and ModeClass.EDGE_RIGHT in by_class:
        g_left = disp.g0 * by_class[ModeClass.EDGE_LEFT].coupling
        g_right = disp.g0 * by_class[ModeClass.EDGE_RIGHT].coupling
    elif ModeClass.EDGE_HYBRID_EVEN in by_class:
        # localized pieces of the even hybrid carry half its squared coupling each
        g_left = g_right = disp.g0 * by_class[ModeClass.EDGE_HYBRID_EVEN].coupling / math.sqrt(2.0)
    else:
        raise UnsupportedRegimeError("no edge modes found")
    j = g_left * g_right / disp.delta0
    return ScatteringParams(
        J=abs(j) / Gamma_L,
        gamma_L=gamma_L / Gamma_L,
        gamma_R=gamma_R / Gamma_L,
        Gamma_L=1.0,
        delta_p_offset=g_left**2 / disp.delta0 / Gamma_L,
    )
