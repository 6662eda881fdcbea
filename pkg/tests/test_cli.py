from __future__ import annotations

import csv
import json

import pytest

from topo_cqed.cli import main

SMALL = {
    "spectroscopy-map": ["phi_over_pi.num=3", "drive_offset_MHz.num=5"],
    "coupling-spectrum": ["array.n_cells=4"],
    "rabi-dynamics": ["array.n_cells=3", "time_us.num=21"],
    "scattering": ["delta_p.num=11"],
    "circuit-design": ["phi_over_pi.num=5"],
    "disorder-ensemble": ["array.n_cells=4", "n_samples=3", "drive_offset_MHz.num=301"],
    "oracle-check": ["drive_offset_MHz.num=3"],
}
HEADERS = {
    "spectroscopy-map": ["phi", "omega_l_MHz", "R", "T"],
    "coupling-spectrum": ["phi", "j", "omega_j_MHz", "xi_j", "parity", "class"],
    "rabi-dynamics": ["time_us"] + [f"site_{n}" for n in range(1, 7)] + ["total_norm"],
    "scattering": ["delta_p_over_GammaL", "T", "Re_chi", "Im_chi", "Im_peak1", "Im_peak2"],
    "circuit-design": ["phi", "delta_t1", "delta_t2", "phi_ext_t1", "phi_ext_t2", "g"],
    "disorder-ensemble": ["sample", "peak1_MHz", "peak2_MHz", "splitting_MHz", "resolvable", "T_center"],
    "oracle-check": ["omega_l_MHz", "R_linear", "R_oracle", "R_oracle_half_eta", "abs_error"],
}


def run(tmp_path, name, *extra, out="out.csv"):
    args = [name, "-o", str(tmp_path / out)]
    for s in SMALL.get(name, []):
        args += ["--set", s]
    return main(args + list(extra))


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


@pytest.mark.parametrize("name", sorted(SMALL))
def test_each_experiment_writes_csv_and_sidecar(tmp_path, name):
    assert run(tmp_path, name, "--seed", "3") == 0
    rows = read_csv(tmp_path / "out.csv")
    assert rows[0] == HEADERS[name]
    assert len(rows) > 1
    meta = json.loads((tmp_path / "out.json").read_text())
    assert meta["experiment"] == name and meta["seed"] == 3
    assert meta["wall_time_s"] >= 0 and meta["version"]
    assert str(tmp_path / "out.csv") in meta["outputs"]


def test_spectroscopy_map_writes_mode_overlay(tmp_path):
    assert run(tmp_path, "spectroscopy-map") == 0
    modes = read_csv(tmp_path / "out_modes.csv")
    assert modes[0] == ["phi", "omega_j_MHz"]
    assert len(modes) == 1 + 3 * 8


def test_same_seed_gives_identical_bytes(tmp_path):
    extra = ["--set", "disorder_MHz=2.0"]
    assert run(tmp_path, "rabi-dynamics", "--seed", "11", *extra, out="a.csv") == 0
    assert run(tmp_path, "rabi-dynamics", "--seed", "11", *extra, out="b.csv") == 0
    assert run(tmp_path, "rabi-dynamics", "--seed", "12", *extra, out="c.csv") == 0
    a, b, c = ((tmp_path / f).read_bytes() for f in ("a.csv", "b.csv", "c.csv"))
    assert a == b and a != c


def test_disorder_ensemble_independent_of_jobs(tmp_path):
    assert run(tmp_path, "disorder-ensemble", "--seed", "5", "--jobs", "1", out="a.csv") == 0
    assert run(tmp_path, "disorder-ensemble", "--seed", "5", "--jobs", "3", out="b.csv") == 0
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_seed_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("TOPO_CQED_SEED", "42")
    assert run(tmp_path, "scattering") == 0
    assert json.loads((tmp_path / "out.json").read_text())["seed"] == 42
    assert run(tmp_path, "scattering", "--seed", "7") == 0
    assert json.loads((tmp_path / "out.json").read_text())["seed"] == 7
    monkeypatch.delenv("TOPO_CQED_SEED")
    assert run(tmp_path, "scattering") == 0
    assert json.loads((tmp_path / "out.json").read_text())["seed"] == 0


def test_config_file_and_overrides(tmp_path):
    cfg = tmp_path / "run.toml"
    cfg.write_text("seed = 9\n\n[array]\nn_cells = 2\n\n[time_us]\nstart = 0.0\nstop = 1.0\nnum = 11\n")
    assert main(["rabi-dynamics", "--config", str(cfg), "-o", str(tmp_path / "r.csv"), "--no-decay"]) == 0
    rows = read_csv(tmp_path / "r.csv")
    assert len(rows[0]) == 1 + 4 + 1 and len(rows) == 12
    meta = json.loads((tmp_path / "r.json").read_text())
    assert meta["seed"] == 9 and meta["parameters"]["include_decay"] is False
    # no decay: the norm stays at one
    assert all(abs(float(r[-1]) - 1) < 1e-9 for r in rows[1:])


def test_config_error_reports_line_and_field(tmp_path, capsys):
    cfg = tmp_path / "bad.toml"
    cfg.write_text("[array]\nn_cells = 4\nbogus_field = 1\n")
    assert main(["coupling-spectrum", "--config", str(cfg), "-o", str(tmp_path / "x.csv")]) == 2
    err = capsys.readouterr().err
    assert "bad.toml:3: array.bogus_field" in err
    assert not (tmp_path / "x.csv").exists()


def test_bad_override_and_jobs_are_config_errors(tmp_path, capsys):
    assert run(tmp_path, "scattering", "--set", "J=-1") == 2
    assert run(tmp_path, "scattering", "--set", "nonsense") == 2
    assert run(tmp_path, "scattering", "--jobs", "0") == 2
    assert "config error" in capsys.readouterr().err


def test_physics_error_exit_code(tmp_path, capsys):
    code = run(tmp_path, "rabi-dynamics", "--set", "dispersive.delta0_MHz=5.0")
    assert code == 3
    assert "DomainError" in capsys.readouterr().err


def test_help_lists_schemas(capsys):
    with pytest.raises(SystemExit) as info:
        main(["--help"])
    assert info.value.code == 0
    text = capsys.readouterr().out
    for name in HEADERS:
        assert name in text
    assert "time_us,site_1" in text and "Exit status" in text


def test_oracle_check_prints_verdict(tmp_path, capsys):
    assert run(tmp_path, "oracle-check") == 0
    out = capsys.readouterr().out
    assert "[PASS] max |R_lin - R_oracle|" in out


def test_accept_reports_every_criterion(tmp_path, capsys):
    # exits 1: the scattering peak-distance criterion does not hold at the stated rates
    assert main(["accept", "-o", str(tmp_path / "acc.csv")]) == 1
    out = capsys.readouterr().out
    assert out.count("[PASS]") == 9 and "[FAIL]  8 waveguide scattering" in out
    rows = read_csv(tmp_path / "acc.csv")
    assert rows[0] == ["criterion", "name", "passed", "detail"] and len(rows) == 11
