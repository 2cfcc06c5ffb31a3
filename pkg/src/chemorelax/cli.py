"""Command-line surface: simulate, limit, sweep, picard, check, report.

Configuration comes from a flat key=value file (``--config``); every flag
overrides the file.  Exit codes: 0 success, 2 validation error, 3
numerical failure.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import diagnostics, fields, harness, hyperbolic, limits, models, picard
from .harness import CONFIG_KEYS, RunConfig
from .hyperbolic import SimulationError
from .models import DensityFloorError, ModelParams, ScalingVariant

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chemorelax",
                                     description="Chemotaxis relaxation-limit laboratory")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, descr in (
            ("simulate", "one hyperbolic run"),
            ("limit", "one limit (Keller-Segel) run"),
            ("sweep", "epsilon convergence study"),
            ("picard", "linearized iteration scheme"),
            ("check", "full invariant suite on small grids"),
            ("report", "render CSVs in out.dir to static SVG plots")):
        p = sub.add_parser(name, help=descr)
        p.add_argument("--config", help="path to key=value config file")
        for key in CONFIG_KEYS:
            p.add_argument("--" + key.replace(".", "-").replace("_", "-"),
                           dest=key, default=None, metavar="V")
    return parser


def _load_config(args) -> RunConfig:
    mapping = {}
    if args.config:
        mapping.update(harness.parse_config_file(args.config))
    for key in CONFIG_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            mapping[key] = value
    return harness.config_from_mapping(mapping)


def _write_run_outputs(config: RunConfig, tracker) -> None:
    os.makedirs(config.out_dir, exist_ok=True)
    diagnostics.write_timeseries(os.path.join(config.out_dir, "timeseries.csv"),
                                 tracker.reports)


def _cmd_simulate(config: RunConfig) -> int:
    eps = config.epsilons[0]
    params = config.params(eps)
    state = harness.make_initial_data(config, eps)
    tracker = diagnostics.EnergyTracker(params)
    snap_dir = os.path.join(config.out_dir, "snapshots") if config.snapshot_every else None
    hyperbolic.simulate(state, params, config.T, observers=[tracker],
                        cfl=config.cfl, observe_every=config.observe_every,
                        snapshot_dir=snap_dir, snapshot_every=config.snapshot_every)
    _write_run_outputs(config, tracker)
    return EXIT_OK


def _cmd_limit(config: RunConfig) -> int:
    eps = config.epsilons[0]
    params = config.params(eps)
    state = harness.make_initial_data(config, eps)
    tracker = diagnostics.EnergyTracker(params)
    limits.limit_simulate(state.rho, params, config.T, observers=[tracker],
                          cfl=config.cfl, observe_every=config.observe_every,
                          c0=state.c)
    _write_run_outputs(config, tracker)
    return EXIT_OK


def _cmd_sweep(config: RunConfig) -> int:
    table = harness.run_sweep(config)
    os.makedirs(config.out_dir, exist_ok=True)
    table.to_csv(os.path.join(config.out_dir, "sweep.csv"))
    for row in zip(table.epsilons, table.err_l2, [float("nan")] + table.orders_l2):
        print("eps=%.6g  err_l2=%.6e  order_l2=%.3f" % row)
    return EXIT_OK


def _cmd_picard(config: RunConfig) -> int:
    eps = config.epsilons[0]
    if config.variant is not ScalingVariant.FIRST:
        raise ValueError("picard requires variant=first")
    params = config.params(eps)
    pconfig = picard.PicardConfig(rho_tilde=config.rho_base, epsilon=eps,
                                  T=config.T, K=config.picard_K,
                                  delta=config.picard_delta,
                                  tol=config.picard_tol,
                                  max_iters=config.picard_max_iters)
    state = harness.make_initial_data(config, eps)
    v1, v2 = models.velocity(state)
    result = picard.run_iteration(pconfig, params, (state.rho, v1, v2, state.c),
                                  cfl=config.cfl)
    os.makedirs(config.out_dir, exist_ok=True)
    picard.write_iteration_report(os.path.join(config.out_dir, "picard.csv"), result)
    print("converged=%s iterates=%d" % (result.converged, len(result.iterates)))
    return EXIT_OK if result.converged else EXIT_NUMERICAL


def _check_rows(config: RunConfig):
    """Small-grid invariant battery; deterministic for a fixed config."""
    n = 16
    rows = []

    f = fields.from_function(n, lambda x, y: np.sin(2 * np.pi * x))
    exact = fields.from_function(n, lambda x, y: 2 * np.pi * np.cos(2 * np.pi * x))
    rows.append(("derivative_max_err",
                 fields.lp_norm(fields.derivative(f, "x") - exact, np.inf)))

    rho = fields.from_function(n, lambda x, y: 1.0 + 0.3 * np.cos(2 * np.pi * x))
    c = fields.solve_helmholtz(rho, 2.0, 3.0)
    res = fields.laplacian(c) + rho * 2.0 - c * 3.0
    rows.append(("helmholtz_residual", fields.lp_norm(res, np.inf)))

    cp = fields.solve_poisson_meanzero(rho, 1.0)
    res_p = fields.laplacian(cp) + (rho - models.mass(rho))
    rows.append(("poisson_residual", fields.lp_norm(res_p, np.inf)))
    rows.append(("poisson_mean", abs(fields.mean(cp))))

    sf = fields.transform(f)
    rows.append(("parseval_gap",
                 abs(fields.lp_norm(f, 2) ** 2 - float(np.sum(np.abs(sf.coeffs) ** 2)))))

    for variant in ScalingVariant:
        params = RunConfig(variant=variant, n=n, epsilons=(0.5,)).params(0.5)
        st = models.stationary_state(params, 1.0, n)
        summary = hyperbolic.simulate(st, params, 20 * hyperbolic.stable_dt(st, params, 0.4))
        drift = max(fields.lp_norm(summary.final.rho - st.rho, np.inf),
                    fields.lp_norm(summary.final.m, np.inf))
        rows.append((f"stationary_drift_{variant.value}", drift))

    cfg = RunConfig(variant=ScalingVariant.FIRST, n=n, epsilons=(0.5,),
                    ic_kind="single_mode", amplitude=0.05)
    params = cfg.params(0.5)
    st = harness.make_initial_data(cfg, 0.5)
    summary = hyperbolic.simulate(st, params, 50 * hyperbolic.stable_dt(st, params, 0.4))
    rows.append(("mass_drift", abs(models.mass(summary.final.rho) - models.mass(st.rho))))

    rng = np.random.default_rng(7)
    rnd = models.State(
        rho=fields.Field2D(1.0 + 0.5 * rng.random((n, n))),
        m=fields.Field2D(rng.standard_normal((n, n))),
        n=fields.Field2D(rng.standard_normal((n, n))),
        c=fields.constant(n, 0.0), t=0.0)
    coeffs = models.assemble_linear_coeffs(rnd, params)
    sa1 = coeffs.s_diag[..., :, None] * coeffs.a1
    sa2 = coeffs.s_diag[..., :, None] * coeffs.a2
    asym = max(np.abs(sa1 - np.swapaxes(sa1, -1, -2)).max(),
               np.abs(sa2 - np.swapaxes(sa2, -1, -2)).max())
    rows.append(("symmetrizer_asymmetry", asym))

    rows.append(("tm_gap_zero", diagnostics.trudinger_moser_gap(fields.constant(n, 0.0))))
    return rows


def _cmd_check(config: RunConfig) -> int:
    rows = _check_rows(config)
    os.makedirs(config.out_dir, exist_ok=True)
    with open(os.path.join(config.out_dir, "check.csv"), "w", newline="") as fh:
        fh.write("name,value\n")
        for name, value in rows:
            fh.write(f"{name},{value:.17g}\n")
    worst = max(abs(v) for _, v in rows)
    print(f"check: {len(rows)} invariants, worst residual {worst:.3e}")
    return EXIT_OK


def _cmd_report(config: RunConfig) -> int:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    made_any = False
    ts_path = os.path.join(config.out_dir, "timeseries.csv")
    if os.path.exists(ts_path):
        data = np.genfromtxt(ts_path, delimiter=",", names=True)
        fig, axes = plt.subplots(2, 2, figsize=(9, 6), constrained_layout=True)
        panels = (("mass", "min_rho"), ("kinetic", "potential"),
                  ("E", "J"), ("dissipation_cum", "gradc_l2"))
        for ax, names in zip(axes.flat, panels):
            for name in names:
                ax.plot(data["t"], data[name], label=name)
            ax.set_xlabel("t")
            ax.legend(fontsize=8)
        fig.savefig(os.path.join(config.out_dir, "timeseries.svg"))
        plt.close(fig)
        made_any = True
    sweep_path = os.path.join(config.out_dir, "sweep.csv")
    if os.path.exists(sweep_path):
        data = np.genfromtxt(sweep_path, delimiter=",", names=True)
        data = np.atleast_1d(data)
        fig, ax = plt.subplots(figsize=(5, 4), constrained_layout=True)
        for name in ("err_l1", "err_l2", "err_linf"):
            ax.loglog(data["epsilon"], data[name], "o-", label=name)
        ax.set_xlabel("epsilon")
        ax.set_ylabel("error vs limit")
        ax.legend()
        fig.savefig(os.path.join(config.out_dir, "sweep.svg"))
        plt.close(fig)
        made_any = True
    if not made_any:
        raise ValueError(f"no timeseries.csv or sweep.csv found in {config.out_dir!r}")
    return EXIT_OK


_COMMANDS = {
    "simulate": _cmd_simulate,
    "limit": _cmd_limit,
    "sweep": _cmd_sweep,
    "picard": _cmd_picard,
    "check": _cmd_check,
    "report": _cmd_report,
}


def cli(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_VALIDATION if exc.code not in (0, None) else EXIT_OK
    try:
        config = _load_config(args)
        return _COMMANDS[args.command](config)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (SimulationError, DensityFloorError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


def main() -> None:
    sys.exit(cli())


if __name__ == "__main__":
    main()
