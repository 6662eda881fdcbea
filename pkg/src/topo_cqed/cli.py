"""``topo-cqed`` command-line entry point.

Every experiment reads an optional TOML config (``--config``), applies
``--set section.key=value`` overrides, writes a CSV (12 significant
digits) and a JSON sidecar with parameters, seed, version and wall time.

CSV schemas
  spectroscopy-map   phi,omega_l_MHz,R,T           (+ <stem>_modes.csv: phi,omega_j_MHz)
  coupling-spectrum  phi,j,omega_j_MHz,xi_j,parity,class
  rabi-dynamics      time_us,site_1,...,site_2N,total_norm
  scattering         delta_p_over_GammaL,T,Re_chi,Im_chi,Im_peak1,Im_peak2
  circuit-design     phi,delta_t1,delta_t2,phi_ext_t1,phi_ext_t2,g
  disorder-ensemble  sample,peak1_MHz,peak2_MHz,splitting_MHz,resolvable,T_center
  oracle-check       omega_l_MHz,R_linear,R_oracle,R_oracle_half_eta,abs_error
  accept             criterion,name,passed,detail
Frequencies are linear MHz, phases and phi in radians, times in us.

Exit status: 0 success, 1 failed checks, 2 configuration error, 3 physics error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from . import __version__, acceptance, circuit, dispersive, lattice, oracle, scattering, spectroscopy
from .config import SCHEMAS, ConfigError, load_config, resolve_seed
from .errors import TopoCQEDError
from .units import MHZ

EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_PHYSICS = 0, 1, 2, 3


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.12g" % v
    return str(v)


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _map(fn: Callable, items, jobs: int) -> list:
    """Order-preserving map, threaded when ``jobs > 1``."""
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


# ---------------------------------------------------------------------------
# recipes: each returns {filename_suffix: csv text} plus a summary dict


def run_spectroscopy_map(cfg, seed, jobs):
    arr = cfg.array.to_params()
    cav = cfg.cavity.to_params(arr)
    phis = cfg.phi_over_pi.values() * math.pi
    drives = arr.qubit_freq + cfg.drive_offset_MHz.values() * MHZ
    smap = spectroscopy.reflection_map(arr, cav, phis, drives, jobs=jobs)
    offs = (drives - arr.qubit_freq) / MHZ
    rows = (
        (phi, w, r, 1.0 - r) for phi, rr in zip(phis, smap.values) for w, r in zip(offs, rr)
    )
    overlay = ((phi, (e - arr.qubit_freq) / MHZ) for phi, ee in zip(phis, smap.eigenenergies) for e in ee)
    files = {
        "": csv_text(["phi", "omega_l_MHz", "R", "T"], rows),
        "_modes": csv_text(["phi", "omega_j_MHz"], overlay),
    }
    return files, {"frequencies": "offsets from omega0"}


def run_coupling_spectrum(cfg, seed, jobs):
    phis = [cfg.array.phi_over_pi * math.pi] if cfg.phi_over_pi is None else cfg.phi_over_pi.values() * math.pi

    def one(phi):
        arr = cfg.array.to_params(phi=float(phi))
        return arr, lattice.eigensystem(lattice.build_hamiltonian(arr), arr)

    rows = []
    for phi, (arr, modes) in zip(phis, _map(one, phis, jobs)):
        for m in modes:
            rows.append((phi, m.index, (m.energy - arr.qubit_freq) / MHZ, m.coupling, m.parity.value, m.mode_class.value))
    return {"": csv_text(["phi", "j", "omega_j_MHz", "xi_j", "parity", "class"], rows)}, {}


def run_rabi_dynamics(cfg, seed, jobs):
    arr = cfg.array.to_params(gamma=cfg.include_decay)
    if cfg.disorder_MHz > 0:
        arr = spectroscopy.disorder_sample(arr, cfg.disorder_MHz * MHZ, seed)
    disp = cfg.dispersive.to_params(cfg.include_decay)
    if cfg.basis == "qubits":
        h = dispersive.effective_hamiltonian_qubits(arr, disp)
    else:
        modes = lattice.eigensystem(lattice.build_hamiltonian(arr), arr)
        h = dispersive.modes_to_sites(dispersive.effective_hamiltonian_modes(arr, disp, modes), modes)
    trace = dispersive.evolve_excitation(h, cfg.initial_site, cfg.time_us.values())
    header = ["time_us"] + [f"site_{n}" for n in range(1, arr.n_sites + 1)] + ["total_norm"]
    rows = ([t, *p, nrm] for t, p, nrm in zip(trace.times, trace.populations, trace.norm))
    summary = {"method": trace.metadata["method"]}
    try:
        period, j = dispersive.measure_oscillation_period(trace, cfg.initial_site)
        summary.update(period_us=period, J_MHz=j / MHZ)
    except TopoCQEDError as exc:
        summary["period_error"] = str(exc)
    return {"": csv_text(header, rows)}, summary


def run_scattering(cfg, seed, jobs):
    sp = cfg.to_params()
    d = cfg.delta_p.values()
    t = scattering.transmission_amplitude(d, sp)
    chi = scattering.susceptibility(d, sp)
    summary = {}
    try:
        dec = scattering.decompose_poles(sp)
        p1, p2 = dec.term(0, d).imag, dec.term(1, d).imag
        summary.update(
            poles=[[p.real, p.imag] for p in dec.poles],
            peak_signs=[None if s is None else s.value for s in dec.peak_signs],
        )
    except TopoCQEDError as exc:
        p1 = p2 = np.full(d.size, np.nan)
        summary["decomposition_error"] = str(exc)
    rep = scattering.classify_transparency(sp)
    summary.update(regime=rep.regime.value, dip_distance=rep.dip_distance, two_J=rep.two_j,
                   resonance_splitting=rep.resonance_splitting)
    rows = zip(d, np.abs(t) ** 2, chi.real, chi.imag, p1, p2)
    return {"": csv_text(["delta_p_over_GammaL", "T", "Re_chi", "Im_chi", "Im_peak1", "Im_peak2"], rows)}, summary


def run_circuit_design(cfg, seed, jobs):
    cc = cfg.to_coupler()
    t0 = cfg.t0_MHz * MHZ
    rc = cfg.to_resonator()
    g_bare = cfg.g0_MHz * MHZ if rc is None else circuit.qubit_resonator_coupling(rc, cc.qubit_freq)
    g = g_bare + circuit.frequency_shifts(t0, t0, g_bare, cc.qubit_freq).delta_g
    rows = []
    for phi in cfg.phi_over_pi.values() * math.pi:
        d1 = circuit.delta_for_phi(cc, t0, float(phi), "t1")
        d2 = circuit.delta_for_phi(cc, t0, float(phi), "t2")
        rows.append((phi, d1, d2, circuit.flux_for_delta(cc, d1), circuit.flux_for_delta(cc, d2), g / MHZ))
    summary = {"c0": cc.c0, "monotone_flux_map": cc.monotone_flux_map, "g_bare_MHz": g_bare / MHZ}
    return {"": csv_text(["phi", "delta_t1", "delta_t2", "phi_ext_t1", "phi_ext_t2", "g"], rows)}, summary


def run_disorder_ensemble(cfg, seed, jobs):
    arr = cfg.array.to_params()
    cav = cfg.cavity.to_params(arr)
    drives = arr.qubit_freq + cfg.drive_offset_MHz.values() * MHZ
    children = np.random.SeedSequence(seed).spawn(cfg.n_samples)
    clean_t = float(spectroscopy.reflection_spectrum(arr, cav, [arr.qubit_freq])[1][0])

    def one(child):
        sample = spectroscopy.disorder_sample(arr, cfg.disorder_MHz * MHZ, child)
        _, trans = spectroscopy.reflection_spectrum(sample, cav, drives)
        pk = spectroscopy.find_rabi_peaks(drives, trans)
        t_c = float(spectroscopy.reflection_spectrum(sample, cav, [arr.qubit_freq])[1][0])
        pos = list(pk.positions) + [math.nan] * (2 - len(pk.positions))
        return [(p - arr.qubit_freq) / MHZ for p in pos], pk.splitting / MHZ, pk.resolvable, t_c

    results = _map(one, children, jobs)
    rows = [(i, p[0], p[1], s, r, tc) for i, (p, s, r, tc) in enumerate(results)]
    summary = {
        "resolvable": sum(r[4] for r in rows),
        "transparency_flagged": sum(r[5] > 10 * clean_t for r in rows),
        "clean_T_center": clean_t,
    }
    header = ["sample", "peak1_MHz", "peak2_MHz", "splitting_MHz", "resolvable", "T_center"]
    return {"": csv_text(header, rows)}, summary


def run_oracle_check(cfg, seed, jobs):
    arr = cfg.array.to_params()
    cav = cfg.cavity.to_params(arr)
    cav = cav.replace(drive_freq=arr.qubit_freq, drive_strength=cfg.eta_over_kappa * cav.kappa)
    system = oracle.TruncatedSystem(arr, cav, cfg.photon_cutoff)
    grid = arr.qubit_freq + cfg.drive_offset_MHz.values() * MHZ
    rows = oracle.agreement_sweep(system, grid)
    err = max(r.error for r in rows)
    shift = max(r.eta_shift for r in rows)
    passed = err < 1e-3 and shift < 1e-4
    print(f"{'omega_l_MHz':>12} {'R_linear':>12} {'R_oracle':>12} {'|diff|':>10}")
    for r in rows:
        print(f"{(r.drive_freq - arr.qubit_freq) / MHZ:12.3f} {r.r_linear:12.8f} {r.r_oracle:12.8f} {r.error:10.2e}")
    print(f"[{'PASS' if passed else 'FAIL'}] max |R_lin - R_oracle| = {err:.2e} (< 1e-3)")
    print(f"[{'PASS' if shift < 1e-4 else 'FAIL'}] eta-halving shift = {shift:.2e} (< 1e-4)")
    out = ((
        (r.drive_freq - arr.qubit_freq) / MHZ, r.r_linear, r.r_oracle, r.r_oracle_half_eta, r.error) for r in rows)
    header = ["omega_l_MHz", "R_linear", "R_oracle", "R_oracle_half_eta", "abs_error"]
    return {"": csv_text(header, out)}, {"passed": passed, "max_error": err, "eta_shift": shift}


def run_accept(cfg, seed, jobs):
    results = acceptance.run_all()
    print(acceptance.format_report(results))
    rows = ((r.number, r.name, r.passed, r.detail) for r in results)
    passed = all(r.passed for r in results)
    return {"": csv_text(["criterion", "name", "passed", "detail"], rows)}, {"passed": passed}


RECIPES = {
    "spectroscopy-map": run_spectroscopy_map,
    "coupling-spectrum": run_coupling_spectrum,
    "rabi-dynamics": run_rabi_dynamics,
    "scattering": run_scattering,
    "circuit-design": run_circuit_design,
    "disorder-ensemble": run_disorder_ensemble,
    "oracle-check": run_oracle_check,
    "accept": run_accept,
}


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="topo-cqed",
        description="Cavity-coupled SSH qubit array simulations.",
        epilog=__doc__.split("\n\n", 2)[2] if __doc__ else None,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="experiment", required=True, metavar="EXPERIMENT")
    for name, schema in SCHEMAS.items():
        p = sub.add_parser(name, help=(schema.__doc__ or "").strip().splitlines()[0] if schema.__doc__ else None)
        p.add_argument("--config", help="TOML config file")
        p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                       help="override a config entry, e.g. array.n_cells=10")
        p.add_argument("--seed", type=int, help="RNG seed (falls back to config, then $TOPO_CQED_SEED)")
        p.add_argument("--jobs", type=int, help="worker threads for grid sweeps")
        p.add_argument("-o", "--output", help="CSV path (default: <experiment>.csv)")
        if name == "rabi-dynamics":
            p.add_argument("--no-decay", action="store_true", help="drop qubit and Purcell decay")
            p.add_argument("--basis", choices=("qubits", "modes"))
    return parser


def main(argv: Optional[list] = None) -> int:
    args = build_parser().parse_args(argv)
    name = args.experiment
    overrides = list(args.overrides)
    if getattr(args, "no_decay", False):
        overrides.append("include_decay=false")
    if getattr(args, "basis", None):
        overrides.append(f"basis='{args.basis}'")
    try:
        cfg = load_config(name, args.config, overrides)
        seed = resolve_seed(args.seed, cfg.seed)
    except ConfigError as exc:
        print(f"config error:\n{exc}", file=sys.stderr)
        return EXIT_CONFIG
    jobs = args.jobs if args.jobs is not None else cfg.jobs
    if jobs < 1:
        print("config error:\n--jobs must be at least 1", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(args.output or cfg.output or f"{name}.csv")
    start = time.perf_counter()
    try:
        files, summary = RECIPES[name](cfg, seed, jobs)
    except TopoCQEDError as exc:
        print(f"{name}: {type(exc).__name__} in {type(exc).__module__}: {exc}", file=sys.stderr)
        return EXIT_PHYSICS
    wall = time.perf_counter() - start
    written = []
    for suffix, text in files.items():
        path = out.with_name(out.stem + suffix + out.suffix)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
        written.append(str(path))
    meta = {
        "experiment": name,
        "version": __version__,
        "seed": seed,
        "jobs": jobs,
        "wall_time_s": wall,
        "parameters": cfg.model_dump(mode="json"),
        "outputs": written,
        "summary": summary,
    }
    out.with_suffix(".json").write_text(json.dumps(meta, indent=2, sort_keys=True, default=_json_default) + "\n")
    if name != "accept" and name != "oracle-check":
        print(f"wrote {', '.join(written)}")
    return EXIT_FAILED if summary.get("passed") is False else EXIT_OK


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.bool_):
        return bool(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


if __name__ == "__main__":
    sys.exit(main())
