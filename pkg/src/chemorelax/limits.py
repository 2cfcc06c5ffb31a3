"""Time integration of the three limit Keller-Segel systems.

Produces the reference density rho0 for the relaxation study.  The space
discretization is the same pseudospectral kernel as the hyperbolic solver,
so eps-errors are not polluted by mixed-discretization bias.  Time stepping
is explicit SSP-RK3 under a parabolic CFL; for the fully parabolic third
variant the chemical equation is advanced exactly per Fourier mode in a
symmetric Strang composition around the density step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import fields, models
from .fields import Field2D
from .models import DensityFloorError, ModelParams, ScalingVariant

__all__ = ["limit_rhs", "limit_stable_dt", "limit_step", "limit_simulate",
           "solve_chemical", "LimitTrajectorySummary"]


def solve_chemical(rho: Field2D, params: ModelParams) -> Field2D:
    """Chemoattractant from the density for the elliptic variants.

    First scaling limit: Helmholtz solve; second: mean-zero Poisson solve.
    (The third scaling's c is dynamic and handled by the stepper.)
    """
    if params.variant is ScalingVariant.SECOND_POISSON:
        return fields.solve_poisson_meanzero(rho, params.alpha)
    return fields.solve_helmholtz(rho, params.alpha, params.beta)


def limit_rhs(rho: Field2D, c: Field2D, params: ModelParams) -> Field2D:
    """Drift-diffusion right-hand side  -div(rho * grad(c - g(rho))).

    Conservative (exact discrete divergence), so the output is mean-free to
    round-off; only grad(c) enters, so the c-gauge is immaterial.
    """
    if rho.min() <= 0:
        raise DensityFloorError("nonpositive density in limit_rhs")
    g = fields.dealias_field(models.pressure_g(rho, params.gamma))
    phi = c - g
    fx = fields.dealias_field(rho * fields.derivative(phi, "x"))
    fy = fields.dealias_field(rho * fields.derivative(phi, "y"))
    return -(fields.derivative(fx, "x") + fields.derivative(fy, "y"))


def limit_stable_dt(rho: Field2D, c: Field2D, params: ModelParams, cfl: float) -> float:
    """Parabolic bound cfl*dx^2 / (2*max(g') + drift margin)."""
    if not (0 < cfl < 1):
        raise ValueError("cfl must lie in (0, 1)")
    dx = 1.0 / rho.n
    gp = models.pressure_gprime(rho, params.gamma)
    g = models.pressure_g(rho, params.gamma)
    phi = c - g
    drift = np.abs(fields.derivative(phi, "x").data) + np.abs(fields.derivative(phi, "y").data)
    denom = 2.0 * float((rho.data * gp.data).max()) + dx * float(drift.max())
    return cfl * dx**2 / denom


def _chemical_parabolic_update(rho: Field2D, c: Field2D, params: ModelParams, h: float) -> Field2D:
    """Exact per-mode step of c_t = Lap c + alpha*rho - beta*c at frozen rho."""
    n = rho.n
    k = np.fft.fftfreq(n) * n
    k2 = 4.0 * np.pi**2 * (k[:, None] ** 2 + k[None, :] ** 2)
    mu = k2 + params.beta
    rh = np.fft.fft2(rho.data, norm="forward")
    ch = np.fft.fft2(c.data, norm="forward")
    equil = params.alpha * rh / mu
    ch_new = equil + (ch - equil) * np.exp(-mu * h)
    return Field2D(np.fft.ifft2(ch_new, norm="forward").real)


def _density_ssp_step(rho: Field2D, params: ModelParams, dt: float, frozen_c: Field2D | None):
    """SSP-RK3 step of the density; c re-solved per stage for elliptic variants."""
    def rhs(r):
        c = frozen_c if frozen_c is not None else solve_chemical(r, params)
        return limit_rhs(r, c, params)

    r1 = rho + rhs(rho) * dt
    r2 = rho * 0.75 + (r1 + rhs(r1) * dt) * 0.25
    return rho * (1.0 / 3.0) + (r2 + rhs(r2) * dt) * (2.0 / 3.0)


def limit_step(rho: Field2D, c: Field2D, params: ModelParams, dt: float):
    """Advance one step; returns (rho, c) at the new time.

    For the elliptic variants ``c`` on entry is ignored and re-solved from
    the density (per RK stage).  For the third variant the chemical field
    is advanced exactly in Fourier space in half-steps around the density
    update.
    """
    if dt <= 0:
        raise ValueError("dt must be > 0")
    if rho.min() <= params.rho_floor:
        raise DensityFloorError("density at floor before limit step")
    if params.variant is ScalingVariant.THIRD_PARABOLIC:
        c_half = _chemical_parabolic_update(rho, c, params, 0.5 * dt)
        rho_new = _density_ssp_step(rho, params, dt, frozen_c=c_half)
        c_new = _chemical_parabolic_update(rho_new, c_half, params, 0.5 * dt)
    else:
        rho_new = _density_ssp_step(rho, params, dt, frozen_c=None)
        c_new = solve_chemical(rho_new, params)
    if rho_new.min() <= params.rho_floor:
        raise DensityFloorError("density hit floor in limit step")
    return rho_new, c_new


@dataclass
class LimitTrajectorySummary:
    rho: Field2D
    c: Field2D
    steps: int
    t: float


def limit_simulate(rho0: Field2D, params: ModelParams, T: float, observers=(),
                   cfl: float = 0.4, dt: float | None = None,
                   observe_every: int = 1, c0: Field2D | None = None) -> LimitTrajectorySummary:
    """Step the limit system from t=0 to T with the same observer contract
    as the hyperbolic solver.  ``c0`` seeds the third variant's dynamic
    chemical field (defaults to the Helmholtz equilibrium of rho0).
    """
    if params.variant is ScalingVariant.THIRD_PARABOLIC:
        c = c0 if c0 is not None else fields.solve_helmholtz(rho0, params.alpha, params.beta)
    else:
        c = solve_chemical(rho0, params)
    rho = rho0
    t = 0.0
    from .models import State

    def emit(nsteps):
        zero = fields.constant(rho.n, 0.0)
        st = State(rho=rho, m=zero, n=zero, c=c, t=t)
        for obs in observers:
            obs(st)

    emit(0)
    if T <= 0:
        return LimitTrajectorySummary(rho=rho, c=c, steps=0, t=t)
    nsteps = 0
    while t < T - 1e-14:
        dt_step = dt if dt is not None else limit_stable_dt(rho, c, params, cfl)
        dt_step = min(dt_step, T - t)
        rho, c = limit_step(rho, c, params, dt_step)
        t += dt_step
        nsteps += 1
        if nsteps % observe_every == 0 or t >= T - 1e-14:
            emit(nsteps)
    return LimitTrajectorySummary(rho=rho, c=c, steps=nsteps, t=t)
