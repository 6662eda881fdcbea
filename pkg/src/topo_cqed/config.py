"""Run configuration: TOML files validated by strict schemas.

Physical inputs are written in linear units (GHz, MHz, kHz, nH) and the
tuning angle as a multiple of pi; ``to_*`` methods convert to the internal
rad/us parameter records. Unknown keys are rejected.
"""

from __future__ import annotations

import math
import os
import re
from pathlib import Path
from typing import Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

try:
    import tomllib as tomli
except ModuleNotFoundError:  # Python < 3.11
    import tomli

from .circuit import CouplerCircuit, ResonatorCoupler
from .dispersive import DispersiveParams
from .lattice import ArrayParams
from .scattering import ScatteringParams
from .spectroscopy import CavityParams, coupling_preset
from .units import GHZ, KHZ, MHZ

SEED_ENV = "TOPO_CQED_SEED"


class ConfigError(Exception):
    """Invalid configuration; ``str()`` carries file/line/field diagnostics."""


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class Grid(_Strict):
    """Inclusive uniform grid ``linspace(start, stop, num)``."""

    start: float
    stop: float
    num: int = Field(ge=1)

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.num)


class ArrayBlock(_Strict):
    n_cells: int = Field(18, ge=1)
    qubit_freq_GHz: float = 6.0
    t0_MHz: float = Field(100.0, gt=0)
    phi_over_pi: float = Field(0.2, ge=0, le=1)
    gamma_kHz: Union[float, list[float]] = 20.0
    offsets_MHz: Optional[list[float]] = None

    @field_validator("gamma_kHz")
    @classmethod
    def _nonnegative(cls, v):
        if min(np.atleast_1d(v)) < 0:
            raise ValueError("decay rates must be nonnegative")
        return v

    @model_validator(mode="after")
    def _lengths(self):
        n = 2 * self.n_cells
        if isinstance(self.gamma_kHz, list) and len(self.gamma_kHz) != n:
            raise ValueError(f"gamma_kHz needs {n} entries")
        if self.offsets_MHz is not None and len(self.offsets_MHz) != n:
            raise ValueError(f"offsets_MHz needs {n} entries")
        return self

    def to_params(self, phi: Optional[float] = None, gamma: Optional[bool] = True) -> ArrayParams:
        offsets = None if self.offsets_MHz is None else np.asarray(self.offsets_MHz) * MHZ
        decays = np.asarray(self.gamma_kHz, dtype=float) * KHZ if gamma else 0.0
        return ArrayParams(
            self.n_cells,
            self.qubit_freq_GHz * GHZ,
            self.t0_MHz * MHZ,
            self.phi_over_pi * math.pi if phi is None else phi,
            qubit_decays=decays,
            frequency_offsets=offsets,
        )


class CavityBlock(_Strict):
    detuning_MHz: float = 0.0  # omega_c - omega0
    kappa_MHz: float = Field(10.0, gt=0)
    g0_MHz: float = 5.0
    coupling: Literal["homogeneous", "alternating-sign-8", "custom"] = "homogeneous"
    custom_vector: Optional[list[float]] = None  # in units of g0

    @model_validator(mode="after")
    def _custom(self):
        if self.coupling == "custom" and self.custom_vector is None:
            raise ValueError("coupling = 'custom' needs custom_vector")
        return self

    def to_params(self, array: ArrayParams) -> CavityParams:
        g0 = self.g0_MHz * MHZ
        if self.coupling == "custom":
            g = g0 * np.asarray(self.custom_vector, dtype=float)
        else:
            g = coupling_preset(self.coupling, array.n_sites, g0)
        return CavityParams(array.qubit_freq + self.detuning_MHz * MHZ, self.kappa_MHz * MHZ, g)


class DispersiveBlock(_Strict):
    g0_MHz: float = 5.0
    delta0_MHz: float = 50.0  # omega0 - omega_c
    kappa_MHz: float = Field(10.0, ge=0)

    def to_params(self, include_decay: bool) -> DispersiveParams:
        return DispersiveParams(self.g0_MHz * MHZ, self.delta0_MHz * MHZ, include_decay, self.kappa_MHz * MHZ)


class _Run(_Strict):
    seed: Optional[int] = None
    output: Optional[str] = None
    jobs: int = Field(1, ge=1)


class SpectroscopyMapConfig(_Run):
    """Reflection over (phi, drive) for a 4-cell chain with alternating-sign coupling."""

    array: ArrayBlock = ArrayBlock(n_cells=4)
    cavity: CavityBlock = CavityBlock(coupling="alternating-sign-8")
    phi_over_pi: Grid = Grid(start=0.0, stop=1.0, num=101)
    drive_offset_MHz: Grid = Grid(start=-250.0, stop=250.0, num=501)


class CouplingSpectrumConfig(_Run):
    """Eigenmode energies and cavity couplings versus phi."""

    array: ArrayBlock = ArrayBlock(n_cells=18, phi_over_pi=0.2)
    phi_over_pi: Optional[Grid] = None


class RabiDynamicsConfig(_Run):
    """Edge-to-edge transfer in the dispersive regime (g0/Delta0 = 0.1 by default)."""

    array: ArrayBlock = ArrayBlock(n_cells=6, phi_over_pi=0.1)
    dispersive: DispersiveBlock = DispersiveBlock()
    basis: Literal["qubits", "modes"] = "qubits"
    include_decay: bool = True
    initial_site: int = Field(1, ge=1)
    time_us: Grid = Grid(start=0.0, stop=3.0, num=601)
    disorder_MHz: float = Field(0.0, ge=0)


class ScatteringConfig(_Run):
    """Superatom transport in units of Gamma_L."""

    J: float = Field(0.035, ge=0)
    gamma_L: float = Field(0.15, ge=0)
    gamma_R: float = Field(5e-4, ge=0)
    Gamma_L: float = Field(1.0, gt=0)
    delta_p: Grid = Grid(start=-0.5, stop=0.5, num=1001)

    def to_params(self) -> ScatteringParams:
        return ScatteringParams(self.J, self.gamma_L, self.gamma_R, self.Gamma_L)


class CouplerBlock(_Strict):
    L_g_nH: float = Field(0.25, gt=0)
    L_0_nH: float = Field(0.566, gt=0)
    L_J_nH: float = Field(8.34, gt=0)


class ResonatorBlock(_Strict):
    Lt_g_nH: float = Field(gt=0)
    Lt_0_nH: float = Field(gt=0)
    L_c_nH: float = Field(gt=0)
    cavity_freq_GHz: float = Field(gt=0)
    delta_t_over_pi: float


class CircuitDesignConfig(_Run):
    """Junction phases and flux biases per phi for the reference coupler circuit."""

    coupler: CouplerBlock = CouplerBlock()
    qubit_freq_GHz: float = 6.0
    t0_MHz: float = Field(100.0, gt=0)
    g0_MHz: float = 5.0
    resonator: Optional[ResonatorBlock] = None
    phi_over_pi: Grid = Grid(start=0.0, stop=1.0, num=101)

    def to_coupler(self) -> CouplerCircuit:
        c = self.coupler
        return CouplerCircuit(c.L_g_nH, c.L_0_nH, c.L_J_nH, self.qubit_freq_GHz * GHZ)

    def to_resonator(self) -> Optional[ResonatorCoupler]:
        r = self.resonator
        if r is None:
            return None
        return ResonatorCoupler(r.Lt_g_nH, r.Lt_0_nH, r.L_c_nH, r.cavity_freq_GHz * GHZ, r.delta_t_over_pi * math.pi)


class DisorderEnsembleConfig(_Run):
    """Rabi spectra of disordered chains."""

    array: ArrayBlock = ArrayBlock(n_cells=18, phi_over_pi=0.2)
    cavity: CavityBlock = CavityBlock()
    disorder_MHz: float = Field(2.0, ge=0)
    n_samples: int = Field(10, ge=1)
    drive_offset_MHz: Grid = Grid(start=-30.0, stop=30.0, num=6001)


class OracleCheckConfig(_Run):
    """Linearized reflection versus the master-equation oracle for one dimer."""

    array: ArrayBlock = ArrayBlock(n_cells=1, phi_over_pi=0.25)
    cavity: CavityBlock = CavityBlock(coupling="custom", custom_vector=[-1.0, 1.0])
    photon_cutoff: int = Field(2, ge=1)
    eta_over_kappa: float = Field(0.01, gt=0)
    drive_offset_MHz: Grid = Grid(start=-200.0, stop=200.0, num=41)


class AcceptConfig(_Run):
    """Run every acceptance check and print one line per criterion."""


SCHEMAS: dict[str, type[_Run]] = {
    "spectroscopy-map": SpectroscopyMapConfig,
    "coupling-spectrum": CouplingSpectrumConfig,
    "rabi-dynamics": RabiDynamicsConfig,
    "scattering": ScatteringConfig,
    "circuit-design": CircuitDesignConfig,
    "disorder-ensemble": DisorderEnsembleConfig,
    "oracle-check": OracleCheckConfig,
    "accept": AcceptConfig,
}


# ---------------------------------------------------------------------------
# loading


def _locate(text: str, loc) -> Optional[int]:
    """1-based line of the key at ``loc`` (best effort)."""
    section = [p for p in loc[:-1] if isinstance(p, str)]
    key = loc[-1] if loc and isinstance(loc[-1], str) else None
    lines = text.splitlines()
    start = 0
    if section:
        header = re.compile(r"^\s*\[\s*" + re.escape(".".join(section)) + r"\s*\]\s*$")
        for i, line in enumerate(lines):
            if header.match(line):
                start = i + 1
                break
        else:
            if key is None:
                return None
    if key is None:
        return start if start else None
    pat = re.compile(r"^\s*" + re.escape(key) + r"\s*=")
    for i in range(start, len(lines)):
        if i > start and lines[i].lstrip().startswith("[") and section:
            break
        if pat.match(lines[i]):
            return i + 1
    return None


def _apply_override(data: dict, assignment: str) -> None:
    if "=" not in assignment:
        raise ConfigError(f"override {assignment!r} must look like section.key=value")
    path, raw = assignment.split("=", 1)
    keys = path.strip().split(".")
    try:
        value = tomli.loads(f"v = {raw.strip()}")["v"]
    except tomli.TOMLDecodeError:
        value = raw.strip()
    node = data
    for k in keys[:-1]:
        node = node.setdefault(k, {})
        if not isinstance(node, dict):
            raise ConfigError(f"override {assignment!r}: {k} is not a section")
    node[keys[-1]] = value


def _merge(base: dict, extra: dict) -> dict:
    """Recursive dict merge; ``extra`` wins."""
    out = dict(base)
    for k, v in extra.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


def load_config(experiment: str, path: Optional[str] = None, overrides=()) -> _Run:
    """Parse and validate the config for ``experiment``; ``overrides`` are ``a.b=value`` strings."""
    if experiment not in SCHEMAS:
        raise ConfigError(f"unknown experiment {experiment!r}")
    text = ""
    data: dict = {}
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"{path}: {exc.strerror}") from exc
        try:
            data = tomli.loads(text)
        except tomli.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    for item in overrides:
        _apply_override(data, item)
    schema = SCHEMAS[experiment]
    merged = _merge(schema().model_dump(exclude_none=True), data)
    try:
        return schema.model_validate(merged)
    except ValidationError as exc:
        msgs = []
        for err in exc.errors():
            field = ".".join(str(p) for p in err["loc"]) or "<root>"
            line = _locate(text, err["loc"]) if text else None
            where = f"{path}:{line}" if line else (path or "<config>")
            msgs.append(f"{where}: {field}: {err['msg']}")
        raise ConfigError("\n".join(msgs)) from None


def resolve_seed(cli_seed: Optional[int], config_seed: Optional[int]) -> int:
    """Flag, then config, then the environment, then 0."""
    if cli_seed is not None:
        return cli_seed
    if config_seed is not None:
        return config_seed
    env = os.environ.get(SEED_ENV)
    if env is not None and env.strip():
        try:
            return int(env)
        except ValueError as exc:
            raise ConfigError(f"{SEED_ENV}={env!r} is not an integer") from exc
    return 0
