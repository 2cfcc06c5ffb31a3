"""Tests for run configuration, initial data, sweeps and the CLI."""

import math

import numpy as np
import pytest

from chemorelax import cli, fields, harness, limits, models
from chemorelax.harness import RunConfig
from chemorelax.models import ScalingVariant


def test_config_validation():
    with pytest.raises(ValueError):
        RunConfig(ic_kind="vortex")
    with pytest.raises(ValueError):
        RunConfig(ic_kind="single_mode", amplitude=1.5, rho_base=1.0)
    with pytest.raises(ValueError):
        RunConfig(ic_kind="random_smooth", seed=None)
    with pytest.raises(ValueError):
        RunConfig(epsilons=())
    # second scaling config coerces beta to 0 in params
    cfg = RunConfig(variant=ScalingVariant.SECOND_POISSON, beta=1.0)
    assert cfg.params(0.5).beta == 0.0


def test_parse_config_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text(
        "# a comment\n"
        "variant = third_parabolic\n"
        "grid.n = 32   # trailing comment\n"
        "run.epsilon = 0.2, 0.1\n"
        "ic.kind = two_mode\n"
        "\n")
    cfg = harness.config_from_mapping(harness.parse_config_file(path))
    assert cfg.variant is ScalingVariant.THIRD_PARABOLIC
    assert cfg.n == 32
    assert cfg.epsilons == (0.2, 0.1)

    path.write_text("grid.m = 32\n")
    with pytest.raises(ValueError, match="grid.m"):
        harness.parse_config_file(path)

    path.write_text("just a line\n")
    with pytest.raises(ValueError, match="key=value"):
        harness.parse_config_file(path)


def test_config_from_mapping_bad_values():
    with pytest.raises(ValueError, match="grid.n"):
        harness.config_from_mapping({"grid.n": "thirty-two"})
    with pytest.raises(ValueError, match="variant"):
        harness.config_from_mapping({"variant": "fourth"})
    with pytest.raises(ValueError, match="epsilon"):
        harness.config_from_mapping({"run.epsilon": "2.0"})
    with pytest.raises(ValueError, match="unknown config keys"):
        harness.config_from_mapping({"grid.q": "1"})


def test_make_initial_data_contract():
    cfg = RunConfig(variant=ScalingVariant.FIRST, n=32, ic_kind="constant")
    st = harness.make_initial_data(cfg, 0.5)
    assert np.all(st.rho.data == 1.0) and np.all(st.m.data == 0.0)

    cfg = RunConfig(variant=ScalingVariant.FIRST, n=32, ic_kind="single_mode",
                    amplitude=0.25)
    st = harness.make_initial_data(cfg, 0.5)
    assert st.rho.min() == 0.75  # rho_base - amplitude exactly
    assert abs(models.mass(st.rho) - 1.0) < 1e-13
    # c from the elliptic solve of the variant
    resolved = fields.solve_helmholtz(st.rho, cfg.alpha, cfg.beta)
    assert fields.lp_norm(st.c - resolved, np.inf) < 1e-14


def test_random_pattern_is_normalized_and_reproducible():
    cfg = RunConfig(variant=ScalingVariant.FIRST, n=32, ic_kind="random_smooth",
                    amplitude=0.1, seed=7)
    a = harness.make_initial_data(cfg, 0.5)
    b = harness.make_initial_data(cfg, 0.5)
    assert np.array_equal(a.rho.data, b.rho.data)
    pattern = (a.rho - 1.0) * (1.0 / cfg.amplitude)
    assert abs(fields.mean(pattern)) < 1e-13
    assert abs(fields.lp_norm(pattern, np.inf) - 1.0) < 1e-12


def test_initial_smallness_epsilon_uniform_for_zero_velocity():
    cfg = RunConfig(variant=ScalingVariant.SECOND_POISSON, n=32,
                    ic_kind="two_mode", amplitude=0.1)
    values = [harness.initial_smallness(harness.make_initial_data(cfg, eps),
                                        cfg.params(eps))
              for eps in (0.4, 0.1, 0.025)]
    assert max(values) - min(values) < 1e-13


def test_run_sweep_contract():
    cfg = RunConfig(variant=ScalingVariant.FIRST, n=16, epsilons=(0.4,),
                    T=0.01, ic_kind="single_mode", amplitude=0.05)
    table = harness.run_sweep(cfg)
    assert len(table.epsilons) == 1
    assert table.orders_l2 == []

    cfg = RunConfig(variant=ScalingVariant.FIRST, n=16, epsilons=(0.4, 0.2),
                    T=0.01, ic_kind="single_mode", amplitude=0.05)
    table = harness.run_sweep(cfg)
    assert len(table.orders_l2) == 1
    assert all(e > 0 for e in table.err_l2)

    with pytest.raises(ValueError):
        harness.run_sweep(RunConfig(epsilons=(0.1, 0.2)))


def test_compare_identical_fields_gives_zero():
    cfg = RunConfig(variant=ScalingVariant.FIRST, n=16, T=0.01,
                    ic_kind="single_mode", amplitude=0.05)
    p = cfg.params(0.4)
    st = harness.make_initial_data(cfg, 0.4)
    out = limits.limit_simulate(st.rho, p, cfg.T, c0=st.c)
    from chemorelax.diagnostics import compare_to_limit
    assert compare_to_limit(out.rho, out.rho) == (0.0, 0.0, 0.0)


def write_cfg(tmp_path, text):
    path = tmp_path / "c.cfg"
    path.write_text(text)
    return str(path)


BASE_CFG = ("variant = first\ngrid.n = 16\nrun.epsilon = 0.5\nrun.T = 0.005\n"
            "ic.kind = constant\n")


def test_cli_simulate_constant_flat_timeseries(tmp_path):
    out = tmp_path / "out"
    path = write_cfg(tmp_path, BASE_CFG + f"out.dir = {out}\n")
    assert cli.cli(["simulate", "--config", path]) == 0
    data = np.genfromtxt(out / "timeseries.csv", delimiter=",", names=True)
    assert np.all(data["mass"] == 1.0)
    assert np.ptp(data["E"]) == 0.0


def test_cli_limit_and_report(tmp_path):
    out = tmp_path / "out"
    path = write_cfg(tmp_path, BASE_CFG.replace("constant", "single_mode")
                     + f"ic.amplitude = 0.05\nout.dir = {out}\n")
    assert cli.cli(["limit", "--config", path]) == 0
    assert (out / "timeseries.csv").exists()
    assert cli.cli(["report", "--config", path]) == 0
    assert (out / "timeseries.svg").exists()


def test_cli_sweep_and_report(tmp_path):
    out = tmp_path / "out"
    path = write_cfg(tmp_path, BASE_CFG.replace("0.5", "0.4, 0.2")
                     .replace("constant", "single_mode")
                     + f"ic.amplitude = 0.05\nout.dir = {out}\n")
    assert cli.cli(["sweep", "--config", path]) == 0
    lines = (out / "sweep.csv").read_text().splitlines()
    assert lines[0] == "epsilon,err_l1,err_l2,err_linf,order_l2"
    assert len(lines) == 3
    assert cli.cli(["report", "--config", path]) == 0
    assert (out / "sweep.svg").exists()


def test_cli_validation_exit_codes(tmp_path, capsys):
    path = write_cfg(tmp_path, BASE_CFG.replace("first", "fourth"))
    assert cli.cli(["simulate", "--config", path]) == 2
    assert "variant" in capsys.readouterr().err

    # increasing epsilon list for a sweep
    path = write_cfg(tmp_path, BASE_CFG.replace("0.5", "0.2, 0.4"))
    assert cli.cli(["sweep", "--config", path]) == 2

    assert cli.cli(["report", "--config",
                    write_cfg(tmp_path, BASE_CFG + "out.dir = /nonexistent-dir\n")]) == 2


def test_cli_flag_overrides(tmp_path):
    out = tmp_path / "flagout"
    path = write_cfg(tmp_path, BASE_CFG)
    assert cli.cli(["simulate", "--config", path, "--out-dir", str(out),
                    "--grid-n", "16"]) == 0
    assert (out / "timeseries.csv").exists()


def test_cli_picard(tmp_path):
    out = tmp_path / "out"
    path = write_cfg(tmp_path, BASE_CFG.replace("constant", "single_mode")
                     + f"ic.amplitude = 0.001\nrun.T = 0.02\nout.dir = {out}\n")
    assert cli.cli(["picard", "--config", path]) == 0
    lines = (out / "picard.csv").read_text().splitlines()
    assert lines[0] == "iter,sup_norm_weighted,diff_norm,min_rho"
    assert len(lines) >= 2


def test_cli_check_deterministic(tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    for out in (out1, out2):
        path = write_cfg(tmp_path, BASE_CFG + f"out.dir = {out}\n")
        assert cli.cli(["check", "--config", path]) == 0
    assert (out1 / "check.csv").read_bytes() == (out2 / "check.csv").read_bytes()


def test_cli_snapshot_cadence(tmp_path):
    out = tmp_path / "out"
    path = write_cfg(tmp_path, BASE_CFG.replace("constant", "single_mode")
                     + f"ic.amplitude = 0.05\nout.snapshot_every = 5\nout.dir = {out}\n")
    assert cli.cli(["simulate", "--config", path]) == 0
    snaps = list((out / "snapshots").glob("*.f2d"))
    assert snaps
    f, t = fields.read_snapshot(snaps[0])
    assert f.n == 16
