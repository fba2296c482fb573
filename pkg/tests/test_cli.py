import csv
import os
import subprocess
import sys

import pytest

from wavekin import collision
from wavekin.cli import main, run_oracle
from wavekin.config import parse_config


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def write_cfg(tmp_path, text, name="run.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_run_defaults_writes_full_series(tmp_path):
    out = tmp_path / "out"
    assert main(["run", "--out", str(out)]) == 0
    rows = read_csv(out / "timeseries.csv")
    assert rows[0] == ["t", "mass", "energy", "m3", "negativity_events"]
    assert len(rows) == 302
    assert rows[1][0] == "0" and rows[-1][0] == "30"
    dens = read_csv(out / "density_30.csv")
    assert dens[0] == ["omega", "f", "N"] and len(dens) == 31
    assert os.path.exists(out / "density_0.csv")


def test_run_t_end_zero(tmp_path):
    cfg = write_cfg(tmp_path, "t_end = 0")
    assert main(["run", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    assert len(read_csv(tmp_path / "o" / "timeseries.csv")) == 2


def test_run_zero_operator_has_constant_energy(tmp_path):
    cfg = write_cfg(tmp_path, "c1 = 0, c2 = 0, t_end = 1")
    assert main(["run", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    energy = {r[2] for r in read_csv(tmp_path / "o" / "timeseries.csv")[1:]}
    assert len(energy) == 1


def test_run_is_byte_identical(tmp_path):
    cfg = write_cfg(tmp_path, "t_end = 3, snapshot_times = 0 1.5 3")
    for d in ("a", "b"):
        assert main(["run", "--config", cfg, "--out", str(tmp_path / d), "--deterministic"]) == 0
    names = sorted(os.listdir(tmp_path / "a"))
    assert names == ["density_0.csv", "density_1.5.csv", "density_3.csv", "timeseries.csv"]
    for n in names:
        assert (tmp_path / "a" / n).read_bytes() == (tmp_path / "b" / n).read_bytes()


def test_floats_use_17_digits(tmp_path):
    cfg = write_cfg(tmp_path, "t_end = 0.1")
    main(["run", "--config", cfg, "--out", str(tmp_path / "o")])
    value = read_csv(tmp_path / "o" / "timeseries.csv")[2][2]
    assert value == format(float(value), ".17g")


@pytest.mark.filterwarnings("ignore:.*negative components:RuntimeWarning")
def test_sweep_layout_and_summary(tmp_path):
    cfg = write_cfg(tmp_path, "t_end = 0.5\nsweep = c1c2\nsweep_values = 1,1; 1,0; 0,0")
    assert main(["sweep", "--config", cfg, "--out", str(tmp_path / "s")]) == 0
    rows = read_csv(tmp_path / "s" / "summary.csv")
    assert rows[0] == ["tuple", "c1", "c2", "energy_0", "energy_T", "m3_0", "m3_T",
                       "energy_constant", "status"]
    assert [r[0] for r in rows[1:]] == ["c1_1.0_c2_1.0", "c1_1.0_c2_0.0", "c1_0.0_c2_0.0"]
    assert [r[7] for r in rows[1:]] == ["false", "false", "true"]
    for slug in ("c1_1.0_c2_1.0", "c1_1.0_c2_0.0", "c1_0.0_c2_0.0"):
        assert len(read_csv(tmp_path / "s" / slug / "timeseries.csv")) == 7


def test_single_tuple_sweep_matches_run(tmp_path):
    cfg = write_cfg(tmp_path, "t_end = 0.5\nsweep = c1c2\nsweep_values = 1,1")
    run_cfg = write_cfg(tmp_path, "t_end = 0.5", "plain.cfg")
    assert main(["sweep", "--config", cfg, "--out", str(tmp_path / "s")]) == 0
    assert main(["run", "--config", run_cfg, "--out", str(tmp_path / "r")]) == 0
    for n in os.listdir(tmp_path / "r"):
        assert (tmp_path / "r" / n).read_bytes() == \
            (tmp_path / "s" / "c1_1.0_c2_1.0" / n).read_bytes()


@pytest.mark.filterwarnings("ignore:.*negative components:RuntimeWarning")
def test_parallel_sweep_matches_serial(tmp_path):
    cfg = write_cfg(tmp_path, "t_end = 0.3, cells = 10\nsweep = sigma_gamma\n"
                              "sweep_values = 0,0; 0.5,0.5; 1,0")
    assert main(["sweep", "--config", cfg, "--out", str(tmp_path / "a"), "--threads", "1"]) == 0
    assert main(["sweep", "--config", cfg, "--out", str(tmp_path / "b"), "--threads", "3"]) == 0
    assert (tmp_path / "a" / "summary.csv").read_bytes() == \
        (tmp_path / "b" / "summary.csv").read_bytes()


def test_sweep_reports_failed_tuple(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "t_end = 0.2, cells = 8\nsweep = sigma_gamma\n"
                              "sweep_values = 0.5,0.5; 400,0")
    assert main(["sweep", "--config", cfg, "--out", str(tmp_path / "s")]) == 1
    rows = read_csv(tmp_path / "s" / "summary.csv")
    assert rows[1][-1] == "ok" and rows[2][-1].startswith("failed")
    assert "sigma_400.0_gamma_0.0" in capsys.readouterr().err


def test_sweep_needs_axis(tmp_path):
    assert main(["sweep", "--out", str(tmp_path / "s")]) == 1


def test_converge_writes_orders(tmp_path):
    cfg = write_cfg(tmp_path, "levels = 8 16")
    assert main(["converge", "--config", cfg, "--out", str(tmp_path / "c")]) == 0
    rows = read_csv(tmp_path / "c" / "converge.csv")
    assert rows[0] == ["delta_omega", "eps_l1", "observed_order"]
    assert len(rows) == 3 and rows[1][2] == "" and float(rows[2][2]) > 0


def test_converge_zero_operator_has_empty_orders(tmp_path):
    cfg = write_cfg(tmp_path, "c1 = 0, c2 = 0, levels = 4 8")
    assert main(["converge", "--config", cfg, "--out", str(tmp_path / "c")]) == 0
    rows = read_csv(tmp_path / "c" / "converge.csv")[1:]
    assert [r[1] for r in rows] == ["0", "0"] and [r[2] for r in rows] == ["", ""]


def test_oracle_command_passes(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "trials = 20, max_cells = 10")
    assert main(["oracle", "--config", cfg, "--seed", "7", "--out", str(tmp_path / "o")]) == 0
    assert capsys.readouterr().out.startswith("oracle: PASS")
    assert len(read_csv(tmp_path / "o" / "oracle.csv")) == 21


def test_oracle_zero_state_and_negative_control():
    m = parse_config("trials = 1")
    assert run_oracle(m, zero_state=True)[0] == 0.0

    def perturbed(n, ctx):
        return collision.rhs(n, ctx) * (1.0 + 1e-9)

    worst, _ = run_oracle(parse_config("trials = 10"), rhs_fn=perturbed)
    assert worst > 1e-12


def test_bad_inputs_give_exit_one(tmp_path, capsys):
    assert main(["run", "--config", str(tmp_path / "missing.cfg")]) == 1
    cfg = write_cfg(tmp_path, "dt = -1")
    assert main(["run", "--config", cfg]) == 1
    assert "'dt'" in capsys.readouterr().err
    assert main(["run", "--threads", "0", "--out", str(tmp_path / "x")]) == 1


def test_threads_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("WAVEKIN_THREADS", "2")
    cfg = write_cfg(tmp_path, "t_end = 0.2")
    assert main(["run", "--config", cfg, "--out", str(tmp_path / "o")]) == 0


def test_console_script_runs(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "wavekin.cli", "oracle", "--out", str(tmp_path)],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "PASS" in proc.stdout
