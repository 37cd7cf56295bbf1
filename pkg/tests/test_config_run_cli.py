import math
from pathlib import Path

import numpy as np
import pytest

from chseed.checkpoint import BadCheckpoint, MAGIC, read_checkpoint, write_checkpoint
from chseed.cli import main
from chseed.config import (ConfigError, DEFAULTS, apply_overrides, load_config,
                           make_run_config, parse_value)
from chseed.run import CSV_COLUMNS, SolverAbort, initial_condition, iterate_solution, run
from chseed.spectral import Field, Grid2D, mean, seminorm
from chseed.stepper import SolverConfig, StepSchedule

TWO_PI = 2.0 * np.pi


# --- config parsing ---------------------------------------------------------


def test_parse_value_forms():
    assert parse_value("3") == 3
    assert parse_value("0.5") == 0.5
    assert parse_value("1e-10") == 1e-10
    assert parse_value('"hello"') == "hello"
    assert parse_value("true") is True and parse_value("false") is False
    assert parse_value("[1, 2.5, -3]") == [1, 2.5, -3]
    assert parse_value("[]") == []
    assert parse_value("III") == "III"
    with pytest.raises(ConfigError):
        parse_value("")


def test_load_config_roundtrip(tmp_path):
    cfg = tmp_path / "run.toml"
    cfg.write_text(
        "# comment\n"
        "grid.n = 32\n"
        'ic.preset = "III"  # trailing comment\n'
        "potential.coeffs = [-1.0, 0.0, 1.0]\n"
        "solver.tol = 1e-9\n"
    )
    data = load_config(cfg)
    assert data == {"grid.n": 32, "ic.preset": "III",
                    "potential.coeffs": [-1.0, 0.0, 1.0], "solver.tol": 1e-9}
    rc = make_run_config(data)
    assert rc.n == 32 and rc.solver.tol == 1e-9
    assert rc.length == DEFAULTS["domain.length"]


def test_load_config_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.toml")
    bad = tmp_path / "bad.toml"
    bad.write_text("grid.n 32\n")
    with pytest.raises(ConfigError):
        load_config(bad)
    unknown = tmp_path / "unknown.toml"
    unknown.write_text("grid.m = 32\n")
    with pytest.raises(ConfigError, match="unknown key"):
        load_config(unknown)


def test_apply_overrides():
    data = apply_overrides({"grid.n": 32}, ["grid.n=16", "schedule.k=0.05"])
    assert data["grid.n"] == 16 and data["schedule.k"] == 0.05
    with pytest.raises(ConfigError):
        apply_overrides({}, ["grid.n"])
    with pytest.raises(ConfigError):
        apply_overrides({}, ["nope=1"])


def test_run_config_validation():
    with pytest.raises(ConfigError):
        make_run_config({"grid.n": 4})
    with pytest.raises(ConfigError):
        make_run_config({"run.t_end": -1.0})
    with pytest.raises(ConfigError):
        make_run_config({"ic.center": "corner"})
    with pytest.raises(ConfigError):
        make_run_config({"solver.mode": "bogus"})


# --- initial conditions ------------------------------------------------------


def test_preset_I_mean_approaches_disk_fraction():
    # disk area / domain area gives mean 1/(2 pi) - 1 in the continuum
    target = 1.0 / TWO_PI - 1.0
    err80 = abs(mean(initial_condition("I", Grid2D(80))) - target)
    err320 = abs(mean(initial_condition("I", Grid2D(320))) - target)
    assert err80 <= 0.02
    assert err320 <= 0.005


def test_preset_III_properties():
    g = Grid2D(64)
    u = initial_condition("III", g)
    assert abs(mean(u)) <= 1e-12
    assert seminorm(u, 1) == pytest.approx(5.0 * np.pi, rel=1e-12)


def test_preset_II_profile():
    g = Grid2D(64)
    u = initial_condition("II", g, epsilon=0.1)
    assert u.values[0, 0] == pytest.approx(np.tanh(-0.17 / (math.sqrt(2) * 0.1)), abs=1e-12)
    assert np.all(np.abs(u.values) <= 1.0)  # tanh saturates to 1.0 in floats far from the interface
    centered = initial_condition("II", g, epsilon=0.1, center="center")
    i_min = np.unravel_index(np.argmin(centered.values), centered.values.shape)
    X, Y = g.mesh
    assert (X[i_min], Y[i_min]) == pytest.approx((np.pi, np.pi), abs=g.h)


def test_ic_from_checkpoint(tmp_path):
    g = Grid2D(16)
    vals = np.arange(256, dtype=float).reshape(16, 16)
    path = tmp_path / "ic.chk"
    write_checkpoint(path, vals, 3.5)
    u = initial_condition(str(path), g)
    assert np.array_equal(u.values, vals)
    with pytest.raises(ConfigError):
        initial_condition(str(path), Grid2D(32))
    with pytest.raises(ConfigError):
        initial_condition("IV", g)


# --- checkpoint format -------------------------------------------------------


def test_checkpoint_round_trip_bytes(tmp_path):
    rng = np.random.default_rng(5)
    vals = rng.standard_normal((12, 12))
    p1, p2 = tmp_path / "a.chk", tmp_path / "b.chk"
    write_checkpoint(p1, vals, 7.25)
    back, t = read_checkpoint(p1)
    assert t == 7.25
    write_checkpoint(p2, back, t)
    assert p1.read_bytes() == p2.read_bytes()
    assert p1.read_bytes()[:8] == MAGIC


def test_checkpoint_rejects_garbage(tmp_path):
    bad = tmp_path / "bad.chk"
    bad.write_bytes(b"NOTMAGIC" + b"\x00" * 64)
    with pytest.raises(BadCheckpoint):
        read_checkpoint(bad)
    short = tmp_path / "short.chk"
    short.write_bytes(MAGIC)
    with pytest.raises(BadCheckpoint):
        read_checkpoint(short)
    truncated = tmp_path / "trunc.chk"
    write_checkpoint(truncated, np.zeros((8, 8)), 0.0)
    raw = truncated.read_bytes()
    truncated.write_bytes(raw[:-16])
    with pytest.raises(BadCheckpoint):
        read_checkpoint(truncated)


# --- run loop ----------------------------------------------------------------


def small_config(tmp_path, **overrides):
    data = {
        "grid.n": 32,
        "run.t_end": 1.0,
        "output.csv": str(tmp_path / "diag.csv"),
        "output.dir": str(tmp_path / "out"),
        "output.snapshot_every": 5,
    }
    data.update(overrides)
    return make_run_config(data)


def test_run_t_end_zero_writes_header_and_initial_checkpoint(tmp_path):
    config = small_config(tmp_path, **{"run.t_end": 0.0})
    assert run(config) == 0
    lines = Path(config.out_csv).read_text().splitlines()
    assert lines == [",".join(CSV_COLUMNS)]
    values, t = read_checkpoint(Path(config.out_dir) / "state_000000.chk")
    assert t == 0.0 and values.shape == (32, 32)
    _, t_final = read_checkpoint(Path(config.out_dir) / "state_final.chk")
    assert t_final == 0.0


def test_run_small_scenario(tmp_path):
    config = small_config(tmp_path)
    assert run(config) == 0
    lines = Path(config.out_csv).read_text().splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) - 1 == 10  # k = 0.1 up to t = 1.0
    rows = [line.split(",") for line in lines[1:]]
    t = np.array([float(r[1]) for r in rows])
    assert np.all(np.diff(t) > 0)
    mass = np.array([float(r[3]) for r in rows])
    assert np.abs(mass - mass[0]).max() <= 1e-11
    # snapshots at steps 5 and 10, plus initial and final states
    out = Path(config.out_dir)
    assert (out / "state_000005.chk").exists()
    assert (out / "state_000010.chk").exists()
    _, t_final = read_checkpoint(out / "state_final.chk")
    assert t_final == pytest.approx(1.0, rel=1e-12)


def test_run_byte_identical_rerun(tmp_path):
    c1 = small_config(tmp_path, **{"output.csv": str(tmp_path / "a.csv"),
                                   "output.dir": str(tmp_path / "outa")})
    c2 = small_config(tmp_path, **{"output.csv": str(tmp_path / "b.csv"),
                                   "output.dir": str(tmp_path / "outb")})
    assert run(c1) == 0 and run(c2) == 0
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_run_random_schedule_deterministic(tmp_path):
    kw = {"schedule.kind": "random_uniform", "schedule.k_lo": 0.02,
          "schedule.k_hi": 0.08, "schedule.seed": 11}
    c1 = small_config(tmp_path, **kw, **{"output.csv": str(tmp_path / "r1.csv"),
                                         "output.dir": str(tmp_path / "outr1")})
    c2 = small_config(tmp_path, **kw, **{"output.csv": str(tmp_path / "r2.csv"),
                                         "output.dir": str(tmp_path / "outr2")})
    assert run(c1) == 0 and run(c2) == 0
    assert (tmp_path / "r1.csv").read_bytes() == (tmp_path / "r2.csv").read_bytes()


def test_retry_policy_exhaustion_aborts():
    from chseed.potential import PolynomialPotential

    g = Grid2D(16)
    u0 = Field(60.0 * np.sin(4 * g.mesh[0]), g)
    schedule = StepSchedule.constant(0.1, 1.0)
    cfg = SolverConfig(max_iter=25)
    with pytest.raises(SolverAbort) as info:
        list(iterate_solution(u0, schedule, 0.1, PolynomialPotential((-1.0, 0.0, 1.0)),
                              cfg))
    assert info.value.step_index == 1
    assert info.value.k_nominal == 0.1


def test_retry_policy_partial_step(tmp_path):
    # moderate amplitude: nominal k fails, a halved step succeeds
    from chseed.potential import PolynomialPotential

    g = Grid2D(32)
    amp = None
    P = PolynomialPotential((-1.0, 0.0, 1.0))
    for trial in (2.2, 2.6, 3.0, 3.4):
        u0 = Field(trial * np.sin(4 * g.mesh[0]) * np.cos(3 * g.mesh[1]), g)
        cfg = SolverConfig(max_iter=80)
        try:
            first = next(iter(iterate_solution(u0, StepSchedule.constant(0.1, 0.5), 0.1, P, cfg)))
        except SolverAbort:
            continue
        if first.outcome.k_used < 0.1:
            amp = trial
            break
    assert amp is not None, "no amplitude exercised the retry ladder"
    assert first.outcome.k_used in (0.05, 0.025, 0.0125, 0.00625)


# --- CLI ---------------------------------------------------------------------


def cli_config(tmp_path, **extra):
    lines = [
        "grid.n = 32",
        "run.t_end = 0.5",
        f'output.csv = "{tmp_path / "diag.csv"}"',
        f'output.dir = "{tmp_path / "out"}"',
    ]
    lines += [f"{k} = {v}" for k, v in extra.items()]
    path = tmp_path / "config.toml"
    path.write_text("\n".join(lines) + "\n")
    return path


def test_cli_run_and_check(tmp_path, capsys):
    cfg = cli_config(tmp_path)
    assert main(["run", "--config", str(cfg)]) == 0
    assert main(["check", "--csv", str(tmp_path / "diag.csv"),
                 "--config", str(cfg)]) == 0
    out = capsys.readouterr().out
    assert "all monitors passed" in out


def test_cli_check_detects_corruption(tmp_path):
    cfg = cli_config(tmp_path)
    assert main(["run", "--config", str(cfg)]) == 0
    csv_path = tmp_path / "diag.csv"
    lines = csv_path.read_text().splitlines()
    cols = lines[3].split(",")
    cols[4] = "99.0"  # bump the energy of one step
    lines[3] = ",".join(cols)
    csv_path.write_text("\n".join(lines) + "\n")
    assert main(["check", "--csv", str(csv_path), "--config", str(cfg)]) == 4


def test_cli_bounds(tmp_path, capsys):
    cfg = cli_config(tmp_path)
    assert main(["bounds", "--config", str(cfg)]) == 0
    out = capsys.readouterr().out
    assert "rho_0k" in out and "gamma1" in out and "satisfied" in out


def test_cli_constants(capsys):
    rc = main(["constants", "--coeffs", "-1", "0", "1", "--c0", "0.25", "--eta", "1.0"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "c1 = 0.5" in out and "c3 = 0.5" in out
    assert "k_energy" in out


def test_cli_config_errors(tmp_path):
    assert main(["run", "--config", str(tmp_path / "none.toml")]) == 3
    bad = tmp_path / "bad.toml"
    bad.write_text("grid.n = 4\n")
    assert main(["run", "--config", str(bad)]) == 3
    assert main(["constants", "--coeffs", "-1", "0", "1", "--c0", "0.6"]) == 3


def test_cli_run_abort_exit_code(tmp_path):
    g = Grid2D(16)
    ic = tmp_path / "huge.chk"
    write_checkpoint(ic, 60.0 * np.sin(4 * g.mesh[0]), 0.0)
    cfg = cli_config(tmp_path, **{
        "grid.n": "16",
        "ic.preset": f'"{ic}"',
        "solver.max_iter": "25",
    })
    assert main(["run", "--config", str(cfg)]) == 2
    # accepted rows (none here) still leave a valid header
    assert (tmp_path / "diag.csv").read_text().splitlines()[0] == ",".join(CSV_COLUMNS)


def test_cli_override(tmp_path):
    cfg = cli_config(tmp_path)
    assert main(["run", "--config", str(cfg), "--override", "run.t_end=0.2"]) == 0
    lines = (tmp_path / "diag.csv").read_text().splitlines()
    assert len(lines) - 1 == 2
