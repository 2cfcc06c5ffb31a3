"""Run configuration, initial data and the epsilon-sweep experiment."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field, replace

import numpy as np

from . import diagnostics, fields, hyperbolic, limits, models
from .diagnostics import ConvergenceTable
from .fields import Field2D
from .hyperbolic import SimulationError
from .models import DensityFloorError, ModelParams, ScalingVariant, State

__all__ = ["RunConfig", "parse_config_file", "config_from_mapping",
           "make_initial_data", "initial_smallness", "run_sweep", "CONFIG_KEYS"]

IC_KINDS = ("constant", "single_mode", "two_mode", "random_smooth")

CONFIG_KEYS = (
    "variant", "grid.n", "phys.gamma", "phys.alpha", "phys.beta",
    "run.epsilon", "run.T", "run.cfl", "ic.kind", "ic.amplitude",
    "ic.rho_base", "ic.seed", "out.dir", "out.snapshot_every",
    "out.observe_every", "picard.K", "picard.delta", "picard.tol",
    "picard.max_iters", "diag.kappa",
)


@dataclass(frozen=True)
class RunConfig:
    variant: ScalingVariant = ScalingVariant.FIRST
    n: int = 64
    gamma: float = 1.0
    alpha: float = 1.0
    beta: float = 1.0
    epsilons: tuple = (0.1,)
    T: float = 0.25
    cfl: float = 0.4
    ic_kind: str = "single_mode"
    amplitude: float = 0.05
    rho_base: float = 1.0
    seed: int | None = None
    out_dir: str = "out"
    snapshot_every: int = 0
    observe_every: int = 1
    picard_K: float = 0.2
    picard_delta: float = 1e-3
    picard_tol: float = 1e-10
    picard_max_iters: int = 50
    kappa: float | None = None

    def __post_init__(self):
        if self.ic_kind not in IC_KINDS:
            raise ValueError(f"ic.kind must be one of {IC_KINDS}, got {self.ic_kind!r}")
        if self.ic_kind != "constant" and not (0 <= self.amplitude < self.rho_base):
            raise ValueError("ic.amplitude must satisfy 0 <= amplitude < ic.rho_base")
        if self.ic_kind == "random_smooth" and self.seed is None:
            raise ValueError("ic.seed is mandatory for ic.kind=random_smooth")
        if not self.epsilons:
            raise ValueError("run.epsilon must list at least one value")

    def params(self, epsilon: float) -> ModelParams:
        beta = 0.0 if self.variant is ScalingVariant.SECOND_POISSON else self.beta
        return ModelParams(alpha=self.alpha, beta=beta, gamma=self.gamma,
                           epsilon=epsilon, variant=self.variant)


def parse_config_file(path) -> dict:
    """Flat key=value config with dotted section names; '#' starts a comment."""
    mapping = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            if "=" not in text:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {line.strip()!r}")
            key, value = (part.strip() for part in text.split("=", 1))
            if key not in CONFIG_KEYS:
                raise ValueError(f"{path}:{lineno}: unknown config key {key!r}")
            mapping[key] = value
    return mapping


def config_from_mapping(mapping: dict) -> RunConfig:
    """Build a RunConfig from a key=value mapping (strings), validating keys."""
    unknown = set(mapping) - set(CONFIG_KEYS)
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    kwargs = {}

    def take(key, conv, dest):
        if key in mapping and mapping[key] is not None:
            try:
                kwargs[dest] = conv(mapping[key])
            except (TypeError, ValueError) as exc:
                raise ValueError(f"bad value for {key}: {mapping[key]!r}") from exc

    take("variant", lambda s: ScalingVariant.parse(str(s)), "variant")
    take("grid.n", int, "n")
    take("phys.gamma", float, "gamma")
    take("phys.alpha", float, "alpha")
    take("phys.beta", float, "beta")
    take("run.epsilon", _parse_eps_list, "epsilons")
    take("run.T", float, "T")
    take("run.cfl", float, "cfl")
    take("ic.kind", str, "ic_kind")
    take("ic.amplitude", float, "amplitude")
    take("ic.rho_base", float, "rho_base")
    take("ic.seed", int, "seed")
    take("out.dir", str, "out_dir")
    take("out.snapshot_every", int, "snapshot_every")
    take("out.observe_every", int, "observe_every")
    take("picard.K", float, "picard_K")
    take("picard.delta", float, "picard_delta")
    take("picard.tol", float, "picard_tol")
    take("picard.max_iters", int, "picard_max_iters")
    take("diag.kappa", float, "kappa")
    return RunConfig(**kwargs)


def _parse_eps_list(text) -> tuple:
    if isinstance(text, (tuple, list)):
        return tuple(float(v) for v in text)
    values = tuple(float(part) for part in str(text).split(","))
    if any(not (0 < v <= 1) for v in values):
        raise ValueError(f"epsilon values must lie in (0, 1], got {values}")
    return values


def _pattern(config: RunConfig) -> Field2D:
    """Mean-zero perturbation pattern with unit sup norm."""
    n = config.n
    if config.ic_kind == "single_mode":
        return fields.from_function(n, lambda x, y: np.cos(2 * np.pi * x))
    if config.ic_kind == "two_mode":
        return fields.from_function(
            n, lambda x, y: np.cos(2 * np.pi * x) * np.cos(2 * np.pi * y))
    if config.ic_kind == "random_smooth":
        rng = np.random.default_rng(config.seed)
        x, y = fields.grid(n)
        data = np.zeros((n, n))
        for kx in range(-3, 4):
            for ky in range(-3, 4):
                if kx == 0 and ky == 0:
                    continue
                amp = rng.normal()
                phase = rng.uniform(0, 2 * np.pi)
                data += amp * np.cos(2 * np.pi * (kx * x + ky * y) + phase)
        data -= data.mean()
        data /= np.abs(data).max()
        return Field2D(data)
    raise ValueError(f"no pattern for ic.kind={config.ic_kind!r}")


def make_initial_data(config: RunConfig, epsilon: float | None = None) -> State:
    """Initial state: rho = rho_base + amplitude*pattern, v = 0, c from the
    variant's elliptic solve (so the initial smallness quantities are
    epsilon-uniform by construction)."""
    eps = epsilon if epsilon is not None else config.epsilons[0]
    params = config.params(eps)
    if config.ic_kind == "constant":
        return models.stationary_state(params, config.rho_base, config.n)
    rho = fields.constant(config.n, config.rho_base) + _pattern(config) * config.amplitude
    if config.variant is ScalingVariant.SECOND_POISSON:
        c = fields.solve_poisson_meanzero(rho, config.alpha)
    else:
        c = fields.solve_helmholtz(rho, config.alpha, config.beta)
    zero = fields.constant(config.n, 0.0)
    return State(rho=rho, m=zero, n=zero, c=c, t=0.0)


def initial_smallness(state: State, params: ModelParams) -> float:
    """The variant's initial-data quantity whose epsilon-uniformity the
    convergence theory requires (kinetic + rho^(gamma+1) + chemical term)."""
    v1, v2 = models.velocity(state)
    kinetic = 0.5 * params.epsilon**2 * fields.mean(state.rho * (v1 * v1 + v2 * v2))
    bulk = fields.mean(Field2D(state.rho.data ** (params.gamma + 1.0)))
    c2 = fields.mean(state.c * state.c)
    if params.variant is ScalingVariant.FIRST:
        return kinetic + bulk + params.epsilon * c2
    if params.variant is ScalingVariant.SECOND_POISSON:
        return kinetic + bulk - 0.5 * fields.mean(state.rho * state.c)
    return kinetic + bulk + c2


def run_sweep(config: RunConfig, observers_factory=None) -> ConvergenceTable:
    """Run the hyperbolic system for each epsilon and compare to one limit run.

    Epsilons must be strictly decreasing; a failing member run marks its
    row with NaN errors and the sweep continues.
    """
    eps_list = list(config.epsilons)
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ValueError("run.epsilon must be strictly decreasing for a sweep")

    limit_params = config.params(eps_list[0])
    initial = make_initial_data(config, eps_list[0])
    limit_summary = limits.limit_simulate(initial.rho, limit_params, config.T,
                                          cfl=config.cfl, c0=initial.c)
    rho_limit = limit_summary.rho

    table = ConvergenceTable()
    for eps in eps_list:
        params = config.params(eps)
        state = make_initial_data(config, eps)
        observers = observers_factory(eps) if observers_factory else ()
        try:
            summary = hyperbolic.simulate(state, params, config.T,
                                          observers=observers, cfl=config.cfl,
                                          observe_every=config.observe_every)
            e1, e2, einf = diagnostics.compare_to_limit(summary.final.rho, rho_limit)
        except (SimulationError, DensityFloorError):
            e1 = e2 = einf = float("nan")
        table.add_row(eps, e1, e2, einf)
    return table
