"""Model data types, pressure law and right-hand-side assembly.

Covers the three diffusive rescalings of the persistence/chemotaxis system
and the symmetrized linear structure used by the Picard existence scheme.
State is carried in conservative variables (rho, m, n, c) with m, n the
momentum components rho*v1, rho*v2; velocity is always derived.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

import numpy as np

from . import fields
from .fields import Field2D

__all__ = [
    "ScalingVariant",
    "ModelParams",
    "State",
    "ConstantState",
    "LinearCoeffs",
    "DensityFloorError",
    "pressure_g",
    "pressure_potential_P",
    "pressure_gprime",
    "stationary_state",
    "flux_divergence",
    "assemble_linear_coeffs",
    "mass",
    "velocity",
]

DEFAULT_RHO_FLOOR = 1e-8


class DensityFloorError(RuntimeError):
    """Raised when the density undershoots the configured floor.

    The run is aborted rather than clipped: clipping would silently break
    the conservation and energy identities the diagnostics monitor.
    """


class ScalingVariant(enum.Enum):
    FIRST = "first"
    SECOND_POISSON = "second_poisson"
    THIRD_PARABOLIC = "third_parabolic"

    @classmethod
    def parse(cls, text: str) -> "ScalingVariant":
        key = text.strip().lower()
        for v in cls:
            if v.value == key:
                return v
        raise ValueError(f"unknown scaling variant {text!r}; "
                         f"expected one of {[v.value for v in cls]}")


@dataclass(frozen=True)
class ModelParams:
    """Physical and scaling constants of one rescaled system.

    ``sigma`` is fixed by the variant (1 for the first scaling, 0 for the
    Poisson-coupled second scaling, 1 for the third) and the second scaling
    forces beta = 0.  The damping coefficient is absorbed into epsilon by
    the rescalings and never stored separately.
    """

    alpha: float
    beta: float
    gamma: float
    epsilon: float
    variant: ScalingVariant
    rho_floor: float = DEFAULT_RHO_FLOOR

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")
        if self.gamma <= 0:
            raise ValueError("gamma must be > 0")
        if not (0 < self.epsilon <= 1):
            raise ValueError("epsilon must lie in (0, 1]")
        if self.variant is ScalingVariant.SECOND_POISSON:
            if self.beta != 0:
                raise ValueError("the second (Poisson) scaling forces beta = 0")
        elif self.beta <= 0:
            raise ValueError("beta must be > 0 for the first and third scalings")

    @property
    def sigma(self) -> int:
        return 0 if self.variant is ScalingVariant.SECOND_POISSON else 1


@dataclass(frozen=True)
class State:
    """Unknowns of one system at one time, in conservative variables."""

    rho: Field2D
    m: Field2D
    n: Field2D
    c: Field2D
    t: float

    def __post_init__(self):
        sizes = {self.rho.n, self.m.n, self.n.n, self.c.n}
        if len(sizes) != 1:
            raise ValueError(f"mixed grid sizes in state: {sorted(sizes)}")

    @property
    def grid_n(self) -> int:
        return self.rho.n


@dataclass(frozen=True)
class ConstantState:
    rho_tilde: float
    c_tilde: float

    def __post_init__(self):
        if self.rho_tilde <= 0:
            raise ValueError("rho_tilde must be > 0")


@dataclass(frozen=True)
class LinearCoeffs:
    """Per-node coefficient matrices of the frozen-coefficient linear system.

    ``a1``/``a2`` hold the 3x3 advection matrices at every node (shape
    (N, N, 3, 3)), ``s_diag`` the diagonal of the symmetrizer (shape
    (N, N, 3)).  The symmetrizer makes S*A1 and S*A2 symmetric at every
    node, which is what the weighted energy estimates rest on.
    """

    a1: np.ndarray
    a2: np.ndarray
    s_diag: np.ndarray


def velocity(state: State):
    """Recover (v1, v2) = (m/rho, n/rho); requires strictly positive rho."""
    if state.rho.min() <= 0:
        raise DensityFloorError(f"nonpositive density at t={state.t}")
    return state.m / state.rho, state.n / state.rho


def pressure_g(rho: Field2D, gamma: float) -> Field2D:
    """Pressure law rho^gamma."""
    if rho.min() < 0:
        raise DensityFloorError("negative density in pressure law")
    return Field2D(rho.data**gamma)


def pressure_potential_P(rho: Field2D, gamma: float) -> Field2D:
    """Antiderivative of the pressure law: rho^(gamma+1)/(gamma+1)."""
    if rho.min() < 0:
        raise DensityFloorError("negative density in pressure potential")
    return Field2D(rho.data ** (gamma + 1.0) / (gamma + 1.0))


def pressure_gprime(rho: Field2D, gamma: float) -> Field2D:
    """g'(rho) = gamma * rho^(gamma-1); singular at zero when gamma < 1."""
    if gamma < 1 and rho.min() <= 0:
        raise DensityFloorError("pressure_gprime with gamma < 1 needs strictly positive density")
    if rho.min() < 0:
        raise DensityFloorError("negative density in pressure_gprime")
    return Field2D(gamma * rho.data ** (gamma - 1.0))


def stationary_state(params: ModelParams, rho_tilde: float, grid_n: int) -> State:
    """Constant stationary state: rho = rho_tilde, v = 0, c = (alpha/beta)*rho_tilde.

    Under the Poisson gauge of the second scaling the constant mode of c is
    fixed to zero instead.
    """
    if rho_tilde <= 0:
        raise ValueError("rho_tilde must be > 0")
    if params.variant is ScalingVariant.SECOND_POISSON:
        c_tilde = 0.0
    else:
        c_tilde = params.alpha / params.beta * rho_tilde
    zero = fields.constant(grid_n, 0.0)
    return State(rho=fields.constant(grid_n, rho_tilde), m=zero, n=zero,
                 c=fields.constant(grid_n, c_tilde), t=0.0)


def flux_divergence(state: State, params: ModelParams, include_pressure: bool = True):
    """Conservative transport divergence of the momentum-form system.

    Returns (d_rho, d_m, d_n) with

        d_rho = -(m_x + n_y)
        d_m   = -(eps^2 m^2/rho + gamma*P(rho))_x - (eps^2 m n/rho)_y
        d_n   = -(eps^2 m n/rho)_x - (eps^2 n^2/rho + gamma*P(rho))_y

    i.e. without the 1/eps^2 scaling and without the source terms, which
    belong to the time stepper.  Each component is an exact discrete
    divergence, so its mean vanishes to round-off.  Pointwise products are
    dealiased by the 2/3 rule.

    With ``include_pressure=False`` the gamma*P(rho) terms are omitted.
    The split time stepper uses this form: it accounts for the pressure
    gradient inside the exact relaxation sub-flow (whose equilibrium is
    the Darcy closure grad c - grad g), so keeping gamma*P here as well
    would apply the pressure twice.
    """
    rho, m, n = state.rho, state.m, state.n
    if rho.min() <= 0:
        raise DensityFloorError(f"nonpositive density at t={state.t}")
    eps2 = params.epsilon**2

    mm = fields.dealias_field(m * m / rho) * eps2
    mn = fields.dealias_field(m * n / rho) * eps2
    nn = fields.dealias_field(n * n / rho) * eps2
    if include_pressure:
        gP = fields.dealias_field(pressure_potential_P(rho, params.gamma) * params.gamma)
        mm = mm + gP
        nn = nn + gP

    d_rho = -(fields.derivative(m, "x") + fields.derivative(n, "y"))
    d_m = -(fields.derivative(mm, "x") + fields.derivative(mn, "y"))
    d_n = -(fields.derivative(mn, "x") + fields.derivative(nn, "y"))
    return d_rho, d_m, d_n


def assemble_linear_coeffs(prev: State, params: ModelParams) -> LinearCoeffs:
    """Coefficient matrices of the linearized system frozen at ``prev``.

    A1 has rows (v1, rho, 0), (g'(rho)/eps^2, v1, 0), (0, 0, v1); A2 is the
    symmetric counterpart in the y-direction; S = diag(g'(rho)/eps^2, rho,
    rho).  S*A1 and S*A2 are exactly symmetric by construction.
    """
    rho = prev.rho
    if rho.min() <= 0:
        raise DensityFloorError("assemble_linear_coeffs needs strictly positive density")
    v1, v2 = velocity(prev)
    gp_eps2 = pressure_gprime(rho, params.gamma).data / params.epsilon**2
    nn = rho.n
    zeros = np.zeros((nn, nn))

    a1 = np.empty((nn, nn, 3, 3))
    a1[..., 0, :] = np.stack([v1.data, rho.data, zeros], axis=-1)
    a1[..., 1, :] = np.stack([gp_eps2, v1.data, zeros], axis=-1)
    a1[..., 2, :] = np.stack([zeros, zeros, v1.data], axis=-1)

    a2 = np.empty((nn, nn, 3, 3))
    a2[..., 0, :] = np.stack([v2.data, zeros, rho.data], axis=-1)
    a2[..., 1, :] = np.stack([zeros, v2.data, zeros], axis=-1)
    a2[..., 2, :] = np.stack([gp_eps2, zeros, v2.data], axis=-1)

    s_diag = np.stack([gp_eps2, rho.data, rho.data], axis=-1)
    return LinearCoeffs(a1=a1, a2=a2, s_diag=s_diag)


def mass(rho: Field2D) -> float:
    """Total mass under the unit-measure normalization (grid mean)."""
    return fields.mean(rho)
