"""Time integration of the three rescaled hyperbolic systems.

The stiff O(1/eps^2) relaxation of the momentum and the O(1/eps) chemical
equation are integrated exactly (per mode / per node), wrapped around an
explicit SSP-RK3 step of the conservative transport part in a symmetric
Strang composition:

    c half-step -> relaxation half-step -> transport -> relaxation -> c

Each sub-flow is exact for its own frozen-coefficient problem, so the
composition is second order in dt and degenerates gracefully to the limit
dynamics as dt/eps^2 grows (asymptotic-preserving by construction).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import fields, models
from .fields import Field2D
from .models import DensityFloorError, ModelParams, ScalingVariant, State

__all__ = ["stable_dt", "step", "simulate", "SimulationError", "TrajectorySummary"]


class SimulationError(RuntimeError):
    """Step failure with the failing time attached."""

    def __init__(self, message: str, t: float):
        super().__init__(f"{message} (at t={t})")
        self.t = t


def stable_dt(state: State, params: ModelParams, cfl: float) -> float:
    """Advective/acoustic CFL bound: cfl * dx / max(|v1|+|v2| + sqrt(g'(rho))/eps)."""
    if not (0 < cfl < 1):
        raise ValueError("cfl must lie in (0, 1)")
    v1, v2 = models.velocity(state)
    gp = models.pressure_gprime(state.rho, params.gamma)
    lam = np.abs(v1.data) + np.abs(v2.data) + np.sqrt(gp.data) / params.epsilon
    dx = 1.0 / state.grid_n
    return cfl * dx / float(lam.max())


def _chemical_update(rho: Field2D, c: Field2D, params: ModelParams, h: float) -> Field2D:
    """Exact per-mode step of the chemical equation at frozen rho.

    First scaling:  eps*c_t = Lap c + alpha*rho - beta*c
    Third scaling:       c_t = Lap c + alpha*rho - beta*c
    Each Fourier coefficient obeys a linear scalar ODE solved exactly.
    """
    tau = params.epsilon if params.variant is ScalingVariant.FIRST else 1.0
    n = rho.n
    k = np.fft.fftfreq(n) * n
    k2 = 4.0 * np.pi**2 * (k[:, None] ** 2 + k[None, :] ** 2)
    mu = (k2 + params.beta) / tau
    rh = np.fft.fft2(rho.data, norm="forward")
    ch = np.fft.fft2(c.data, norm="forward")
    equil = params.alpha * rh / (k2 + params.beta)
    decay = np.exp(-mu * h)
    ch_new = equil + (ch - equil) * decay
    return Field2D(np.fft.ifft2(ch_new, norm="forward").real)


def _equilibrium_velocity(rho: Field2D, c: Field2D, params: ModelParams):
    """Darcy closure grad(c) - grad(g(rho)) toward which the velocity relaxes."""
    g = fields.dealias_field(models.pressure_g(rho, params.gamma))
    phi = c - g
    return fields.derivative(phi, "x"), fields.derivative(phi, "y")


def _relaxation_update(state: State, params: ModelParams, h: float) -> State:
    """Exact step of eps^2 v_t = grad c - grad g(rho) - v at frozen rho, c."""
    v1, v2 = models.velocity(state)
    u1, u2 = _equilibrium_velocity(state.rho, state.c, params)
    decay = np.exp(-h / params.epsilon**2)
    v1n = u1 + (v1 - u1) * decay
    v2n = u2 + (v2 - u2) * decay
    return replace(state, m=state.rho * v1n, n=state.rho * v2n)


def _transport_step(state: State, params: ModelParams, dt: float) -> State:
    """SSP-RK3 (Shu-Osher) step of the conservative transport part."""
    inv_eps2 = 1.0 / params.epsilon**2

    def euler(rho, m, n):
        st = State(rho=rho, m=m, n=n, c=state.c, t=state.t)
        # Pressure is excluded here: the relaxation sub-flow owns it via
        # its Darcy equilibrium grad(c - g(rho)).
        d_rho, d_m, d_n = models.flux_divergence(st, params, include_pressure=False)
        return rho + d_rho * dt, m + d_m * (dt * inv_eps2), n + d_n * (dt * inv_eps2)

    rho0, m0, n0 = state.rho, state.m, state.n
    r1, m1, n1 = euler(rho0, m0, n0)
    r2, m2, n2 = euler(r1, m1, n1)
    r2 = rho0 * 0.75 + r2 * 0.25
    m2 = m0 * 0.75 + m2 * 0.25
    n2 = n0 * 0.75 + n2 * 0.25
    r3, m3, n3 = euler(r2, m2, n2)
    rho_new = rho0 * (1.0 / 3.0) + r3 * (2.0 / 3.0)
    m_new = m0 * (1.0 / 3.0) + m3 * (2.0 / 3.0)
    n_new = n0 * (1.0 / 3.0) + n3 * (2.0 / 3.0)
    return replace(state, rho=rho_new, m=m_new, n=n_new)


def _refresh_poisson(state: State, params: ModelParams) -> State:
    return replace(state, c=fields.solve_poisson_meanzero(state.rho, params.alpha))


def step(state: State, params: ModelParams, dt: float) -> State:
    """Advance one Strang-split step of size dt."""
    if dt <= 0:
        raise ValueError("dt must be > 0")
    if state.rho.min() <= params.rho_floor:
        raise DensityFloorError(f"density {state.rho.min():.3e} at floor before step (t={state.t})")
    h = 0.5 * dt
    poisson = params.variant is ScalingVariant.SECOND_POISSON

    if poisson:
        st = _refresh_poisson(state, params)
    else:
        st = replace(state, c=_chemical_update(state.rho, state.c, params, h))
    st = _relaxation_update(st, params, h)
    st = _transport_step(st, params, dt)
    if st.rho.min() <= params.rho_floor:
        raise DensityFloorError(f"density {st.rho.min():.3e} hit floor (t={state.t})")
    if poisson:
        st = _refresh_poisson(st, params)
    st = _relaxation_update(st, params, h)
    if not poisson:
        st = replace(st, c=_chemical_update(st.rho, st.c, params, h))
    st = replace(st, t=state.t + dt)
    if not np.all(np.isfinite(st.m.data)) or not np.all(np.isfinite(st.rho.data)):
        raise SimulationError("non-finite field after step", state.t)
    return st


@dataclass
class TrajectorySummary:
    final: State
    steps: int
    t: float


def simulate(initial: State, params: ModelParams, T: float, observers=(),
             cfl: float = 0.4, dt: float | None = None,
             observe_every: int = 1, snapshot_dir=None,
             snapshot_every: int = 0) -> TrajectorySummary:
    """Step from t=0 to T, recomputing the stable dt unless ``dt`` is fixed.

    Observers are callables invoked with the current state at t=0 and then
    every ``observe_every`` steps (and always at the final step).  The last
    step is clamped to land exactly on T.
    """
    state = initial
    for obs in observers:
        obs(state)
    if T <= state.t:
        return TrajectorySummary(final=state, steps=0, t=state.t)
    nsteps = 0
    while state.t < T - 1e-14:
        dt_step = dt if dt is not None else stable_dt(state, params, cfl)
        dt_step = min(dt_step, T - state.t)
        try:
            state = step(state, params, dt_step)
        except (DensityFloorError, SimulationError) as exc:
            raise SimulationError(str(exc), state.t) from exc
        nsteps += 1
        last = state.t >= T - 1e-14
        if nsteps % observe_every == 0 or last:
            for obs in observers:
                obs(state)
        if snapshot_dir is not None and snapshot_every > 0 and (
                nsteps % snapshot_every == 0 or last):
            _write_state_snapshots(snapshot_dir, state, nsteps)
    return TrajectorySummary(final=state, steps=nsteps, t=state.t)


def _write_state_snapshots(snapshot_dir, state: State, index: int) -> None:
    import os

    os.makedirs(snapshot_dir, exist_ok=True)
    for name, f in (("rho", state.rho), ("m", state.m), ("n", state.n), ("c", state.c)):
        fields.write_snapshot(os.path.join(snapshot_dir, f"{name}_{index:06d}.f2d"), f, state.t)
