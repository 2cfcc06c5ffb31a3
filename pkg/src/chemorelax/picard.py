"""Linearized iteration scheme for existence near constant states.

Iterates the linear system with coefficients frozen at the previous
iterate, tracking the weighted energy and the H^4-norm bound that the
existence theory guarantees.  Each iterate is advanced on the same fixed
time grid as its predecessor, so coefficient lookup never interpolates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import fields, models
from .fields import Field2D
from .hyperbolic import _chemical_update
from .models import DensityFloorError, LinearCoeffs, ModelParams, ScalingVariant, State

__all__ = ["PicardConfig", "PicardIterate", "PicardResult", "linear_step",
           "run_iteration", "initial_weighted_norm", "weighted_energy",
           "write_iteration_report"]


@dataclass(frozen=True)
class PicardConfig:
    rho_tilde: float
    epsilon: float
    T: float
    K: float = 0.2                 # perturbation radius bound, must be < rho_tilde/2
    delta: float = 1e-3            # initial-data smallness (informational)
    lam: float | None = None       # energy weight; default (rho~+K)^2/(eps(rho~-K))
    s_norm: float = 4.0            # Sobolev index for monitoring
    max_iters: int = 50
    tol: float = 1e-10             # successive-iterate tolerance, weighted sup norm

    def __post_init__(self):
        if not (0 < self.K < self.rho_tilde / 2):
            raise ValueError("K must lie in (0, rho_tilde/2)")
        if self.lam is None:
            lam = (self.rho_tilde + self.K) ** 2 / (self.epsilon * (self.rho_tilde - self.K))
            object.__setattr__(self, "lam", lam)


@dataclass
class PicardIterate:
    """One iterate: its trajectory on the solver time grid and norm record."""

    index: int
    times: np.ndarray
    trajectory: list            # per time sample: (rho, v1, v2, c) Field2D tuple
    sup_norm_weighted: float    # sup_t (|rho-|_H4 + eps |v-|_H4 + sqrt(eps) |c-|_H4)
    diff_norm: float            # weighted sup-distance to the previous iterate
    min_rho: float


@dataclass
class PicardResult:
    trajectory: list
    times: np.ndarray
    iterates: list
    converged: bool


def _weighted_traj_norm(traj, ref, config: PicardConfig) -> float:
    """sup over time of |rho - rho_ref|_Hs + eps |v - v_ref|_Hs + sqrt(eps)|c - c_ref|_Hs."""
    s = config.s_norm
    eps = config.epsilon
    out = 0.0
    for (r, u1, u2, c), (rr, ru1, ru2, rc) in zip(traj, ref):
        nv = math.hypot(fields.sobolev_norm(u1 - ru1, s), fields.sobolev_norm(u2 - ru2, s))
        w = (fields.sobolev_norm(r - rr, s) + eps * nv
             + math.sqrt(eps) * fields.sobolev_norm(c - rc, s))
        out = max(out, w)
    return out


def initial_weighted_norm(initial, config: PicardConfig,
                          c_tilde: float | None = None) -> float:
    """Smallness of the initial data around the constant state:

        |rho0 - rho~|_Hs + eps |v0|_Hs + sqrt(eps) |c0 - c~|_Hs

    This is the delta-quantity of the existence theory; scale the initial
    perturbation so this equals ``config.delta`` when reproducing it.
    """
    rho0, v1_0, v2_0, c0 = initial
    s = config.s_norm
    eps = config.epsilon
    if c_tilde is None:
        c_tilde = fields.mean(c0)
    n = rho0.n
    nv = math.hypot(fields.sobolev_norm(v1_0, s), fields.sobolev_norm(v2_0, s))
    return (fields.sobolev_norm(rho0 - fields.constant(n, config.rho_tilde), s)
            + eps * nv
            + math.sqrt(eps) * fields.sobolev_norm(c0 - fields.constant(n, c_tilde), s))


def _relax_half(v1: Field2D, v2: Field2D, c: Field2D, eps: float, h: float):
    """Exact step of  v_t = (grad c - v)/eps^2  at frozen c."""
    cx = fields.derivative(c, "x")
    cy = fields.derivative(c, "y")
    decay = np.exp(-h / eps**2)
    return cx + (v1 - cx) * decay, cy + (v2 - cy) * decay


def _transport_rhs(coeffs: LinearCoeffs, rho: Field2D, v1: Field2D, v2: Field2D):
    """-A1 dU/dx - A2 dU/dy with the frozen per-node coefficient matrices."""
    ux = np.stack([fields.derivative(f, "x").data for f in (rho, v1, v2)], axis=-1)
    uy = np.stack([fields.derivative(f, "y").data for f in (rho, v1, v2)], axis=-1)
    du = -(np.einsum("xyij,xyj->xyi", coeffs.a1, ux)
           + np.einsum("xyij,xyj->xyi", coeffs.a2, uy))
    return tuple(fields.dealias_field(Field2D(du[..., i])) for i in range(3))


def linear_step(prev: State, cur, params: ModelParams, dt: float):
    """One step of the frozen-coefficient linear system.

    ``prev`` supplies the advective coefficients (previous iterate at the
    step's start time); ``cur`` is the (rho, v1, v2, c) tuple being
    advanced.  Same Strang layout as the nonlinear solver: exact chemical
    and relaxation sub-flows around an SSP-RK3 transport step.
    """
    rho, v1, v2, c = cur
    eps = params.epsilon
    h = 0.5 * dt
    coeffs = models.assemble_linear_coeffs(prev, params)

    c = _chemical_update(rho, c, params, h)
    v1, v2 = _relax_half(v1, v2, c, eps, h)

    def euler(r, u1, u2):
        dr, du1, du2 = _transport_rhs(coeffs, r, u1, u2)
        return r + dr * dt, u1 + du1 * dt, u2 + du2 * dt

    r1, a1, b1 = euler(rho, v1, v2)
    r2, a2, b2 = euler(r1, a1, b1)
    r2 = rho * 0.75 + r2 * 0.25
    a2 = v1 * 0.75 + a2 * 0.25
    b2 = v2 * 0.75 + b2 * 0.25
    r3, a3, b3 = euler(r2, a2, b2)
    rho = rho * (1.0 / 3.0) + r3 * (2.0 / 3.0)
    v1 = v1 * (1.0 / 3.0) + a3 * (2.0 / 3.0)
    v2 = v2 * (1.0 / 3.0) + b3 * (2.0 / 3.0)

    v1, v2 = _relax_half(v1, v2, c, eps, h)
    c = _chemical_update(rho, c, params, h)
    return rho, v1, v2, c


def _prev_state(sample, t: float) -> State:
    rho, v1, v2, c = sample
    return State(rho=rho, m=rho * v1, n=rho * v2, c=c, t=t)


def run_iteration(config: PicardConfig, params: ModelParams, initial,
                  dt: float | None = None, cfl: float = 0.4) -> PicardResult:
    """Iterate the linear scheme from data near the constant state.

    ``initial`` is the (rho0, v1_0, v2_0, c0) tuple.  Iterate 0 is the
    constant-in-time extension of the initial data; iterate n solves the
    linear system with coefficients from iterate n-1 on the same fixed
    time grid.  Stops when successive trajectories differ by less than
    ``config.tol`` in the weighted sup norm, or after ``max_iters``
    sweeps (reported, not raised).
    """
    if params.variant is not ScalingVariant.FIRST:
        raise ValueError("the iteration targets the first (hyperbolic-parabolic) scaling")
    rho0, v1_0, v2_0, c0 = initial
    n = rho0.n
    eps = config.epsilon
    gp = params.gamma * config.rho_tilde ** (params.gamma - 1.0)
    if dt is None:
        dt = cfl * (1.0 / n) * eps / math.sqrt(gp)
    nsteps = max(1, math.ceil(config.T / dt - 1e-12))
    dt = config.T / nsteps
    times = np.arange(nsteps + 1) * dt

    c_tilde = params.alpha / params.beta * config.rho_tilde
    const = (fields.constant(n, config.rho_tilde), fields.constant(n, 0.0),
             fields.constant(n, 0.0), fields.constant(n, c_tilde))
    const_traj = [const] * (nsteps + 1)

    prev_traj = [initial] * (nsteps + 1)   # iterate 0: frozen initial data
    iterates = []
    converged = False
    traj = prev_traj
    for it in range(1, config.max_iters + 1):
        traj = [initial]
        cur = initial
        for j in range(nsteps):
            prev = _prev_state(prev_traj[j], times[j])
            if prev.rho.min() <= params.rho_floor:
                raise DensityFloorError(f"previous iterate density at floor (t={times[j]})")
            cur = linear_step(prev, cur, params, dt)
            traj.append(cur)
        sup_norm = _weighted_traj_norm(traj, const_traj, config)
        diff = _weighted_traj_norm(traj, prev_traj, config)
        min_rho = min(sample[0].min() for sample in traj)
        iterates.append(PicardIterate(index=it, times=times, trajectory=traj,
                                      sup_norm_weighted=sup_norm, diff_norm=diff,
                                      min_rho=min_rho))
        if diff < config.tol:
            converged = True
            break
        prev_traj = traj
    return PicardResult(trajectory=traj, times=times, iterates=iterates,
                        converged=converged)


def weighted_energy(rho_dev: Field2D, v1_dev: Field2D, v2_dev: Field2D,
                    c_dev: Field2D, rho_hat: Field2D, params: ModelParams,
                    lam: float) -> float:
    """(1/2) int [ g'(rho^)/eps^2 rho-^2 + rho^ |v-|^2 + lam c-^2 ]."""
    gp = models.pressure_gprime(rho_hat, params.gamma)
    integrand = (gp * (rho_dev * rho_dev) * (1.0 / params.epsilon**2)
                 + rho_hat * (v1_dev * v1_dev + v2_dev * v2_dev)
                 + c_dev * c_dev * lam)
    return 0.5 * fields.mean(integrand)


def write_iteration_report(path, result: PicardResult) -> None:
    """Iteration report CSV: one row per iterate."""
    with open(path, "w", newline="") as fh:
        fh.write("iter,sup_norm_weighted,diff_norm,min_rho\n")
        for it in result.iterates:
            fh.write(f"{it.index},{it.sup_norm_weighted:.17g},"
                     f"{it.diff_norm:.17g},{it.min_rho:.17g}\n")
