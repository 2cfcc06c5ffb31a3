"""Energy functionals, dissipation balances and uniform-bound monitors.

Everything here is an observer over trajectories: instantaneous
functionals are grid quadratures, cumulative dissipation integrals are
accumulated by the trapezoid rule on the observer samples.  Inequality
constants that the theory only proves to exist (the chemical slack rate,
the lower-bound constant of the gradient estimate, the torus
Trudinger-Moser constant) are *reported*, never asserted against invented
values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import fields, models
from .fields import Field2D
from .models import ModelParams, ScalingVariant, State

__all__ = [
    "EnergyReport",
    "EnergyTracker",
    "ConvergenceTable",
    "functional_J",
    "gradc_bound",
    "GradCBound",
    "trudinger_moser_gap",
    "assumption_monitor",
    "AssumptionRecord",
    "compare_to_limit",
    "write_timeseries",
]

TIMESERIES_HEADER = ("t,mass,min_rho,kinetic,potential,E,J,dissipation_cum,"
                     "gradc_l2,gradc_cum,c_l2_cum,linf_rho,linf_m")


@dataclass(frozen=True)
class EnergyReport:
    """Instantaneous energies plus cumulative dissipation integrals."""

    t: float
    kinetic: float            # (eps^2/2) int rho |v|^2
    potential: float          # int P(rho)
    chem_l2: float            # (eps/2) int c^2, or (1/2) int c^2 (third scaling)
    chem_coupling: float      # (1/2) int rho c (second scaling, else 0)
    dissipation_cum: float    # int_0^t int rho |v|^2
    gradc_l2: float           # int |grad c|^2
    gradc_cum: float          # int_0^t int |grad c|^2
    c_l2_cum: float           # int_0^t int c^2
    cross_cum: float          # int_0^t int rho v . grad c
    energy: float             # variant energy (E_eps for the Poisson scaling)
    J: float                  # int (P(rho) - rho c)
    balance_residual: float   # discrete residual of the variant's balance law
    mass: float
    min_rho: float
    linf_rho: float
    linf_m: float


def functional_J(rho: Field2D, c: Field2D, gamma: float) -> float:
    """Convex functional  int (P(rho) - rho*c)."""
    P = models.pressure_potential_P(rho, gamma)
    return fields.mean(P - rho * c)


def _kinetic(state: State, params: ModelParams) -> float:
    v1, v2 = models.velocity(state)
    return 0.5 * params.epsilon**2 * fields.mean(state.rho * (v1 * v1 + v2 * v2))


def _dissipation_density(state: State) -> float:
    v1, v2 = models.velocity(state)
    return fields.mean(state.rho * (v1 * v1 + v2 * v2))


def _gradc_sq(c: Field2D) -> float:
    cx = fields.derivative(c, "x")
    cy = fields.derivative(c, "y")
    return fields.mean(cx * cx + cy * cy)


def _cross_density(state: State) -> float:
    cx = fields.derivative(state.c, "x")
    cy = fields.derivative(state.c, "y")
    return fields.mean(state.m * cx + state.n * cy)


class EnergyTracker:
    """Observer accumulating the energy reports along one trajectory.

    Owns its accumulators; never share a tracker between trajectories.
    """

    def __init__(self, params: ModelParams):
        self.params = params
        self.reports: list[EnergyReport] = []
        self._prev = None  # (t, dissipation, gradc, c2, cross) at last sample

    def __call__(self, state: State) -> EnergyReport:
        p = self.params
        diss = _dissipation_density(state)
        gradc = _gradc_sq(state.c)
        c2 = fields.mean(state.c * state.c)
        cross = _cross_density(state)

        if self._prev is None:
            acc = dict(dissipation_cum=0.0, gradc_cum=0.0, c_l2_cum=0.0, cross_cum=0.0)
        else:
            t0, d0, g0, c0, x0 = self._prev
            h = state.t - t0
            last = self.reports[-1]
            acc = dict(
                dissipation_cum=last.dissipation_cum + 0.5 * h * (d0 + diss),
                gradc_cum=last.gradc_cum + 0.5 * h * (g0 + gradc),
                c_l2_cum=last.c_l2_cum + 0.5 * h * (c0 + c2),
                cross_cum=last.cross_cum + 0.5 * h * (x0 + cross),
            )
        self._prev = (state.t, diss, gradc, c2, cross)

        kinetic = _kinetic(state, p)
        potential = fields.mean(models.pressure_potential_P(state.rho, p.gamma))
        if p.variant is ScalingVariant.THIRD_PARABOLIC:
            chem_l2 = 0.5 * c2
        else:
            chem_l2 = 0.5 * p.epsilon * c2
        chem_coupling = 0.0
        if p.variant is ScalingVariant.SECOND_POISSON:
            chem_coupling = 0.5 * fields.mean(state.rho * state.c)
            energy = kinetic + potential - chem_coupling
        else:
            energy = kinetic + potential
        J = functional_J(state.rho, state.c, p.gamma)

        if self.reports:
            first = self.reports[0]
            if p.variant is ScalingVariant.SECOND_POISSON:
                balance = energy + acc["dissipation_cum"] - first.energy
            else:
                balance = (energy - first.energy
                           + acc["dissipation_cum"] - acc["cross_cum"])
        else:
            balance = 0.0

        report = EnergyReport(
            t=state.t, kinetic=kinetic, potential=potential, chem_l2=chem_l2,
            chem_coupling=chem_coupling, gradc_l2=gradc, energy=energy, J=J,
            balance_residual=balance, mass=models.mass(state.rho),
            min_rho=state.rho.min(),
            linf_rho=fields.lp_norm(state.rho, np.inf),
            linf_m=max(fields.lp_norm(state.m, np.inf), fields.lp_norm(state.n, np.inf)),
            **acc,
        )
        self.reports.append(report)
        return report

    def chem_slack_rate(self) -> float:
        """Reported rate of the chemical inequality (first scaling).

        Returns the smallest constant for which

            (eps/2) int c(t)^2 + (beta/2) iint c^2 + iint |grad c|^2
                <= rate * t + (eps/2) int c0^2

        holds at every sample; finite and dt-stable on resolved runs.
        """
        if len(self.reports) < 2:
            return 0.0
        p = self.params
        first = self.reports[0]
        rates = []
        for r in self.reports[1:]:
            lhs = r.chem_l2 + 0.5 * p.beta * r.c_l2_cum + r.gradc_cum
            rates.append((lhs - first.chem_l2) / r.t)
        return max(rates)


def energy_first(state: State, params: ModelParams, tracker: EnergyTracker) -> EnergyReport:
    """Feed one state to the tracker under the first-scaling balance law."""
    return tracker(state)


def energy_poisson(state: State, params: ModelParams, tracker: EnergyTracker) -> EnergyReport:
    """Feed one state to the tracker under the Poisson-scaling balance law."""
    return tracker(state)


@dataclass(frozen=True)
class GradCBound:
    J: float                  # the functional value (bounded below)
    gradc_term: float         # (M/(8 pi kappa^2)) * ||grad c||_L2^2
    implied_C: float          # J + gradc_term: lower bound witness for C
    coefficient: float        # 1 - M/(4 pi kappa)


def gradc_bound(rho: Field2D, c: Field2D, gamma: float, kappa: float) -> GradCBound:
    """Both sides of the J lower bound  J >= C - (M/(8 pi kappa^2))||grad c||^2.

    The constant C is run-calibrated (the theory proves existence, not
    size); we report the witness J + gradient term and the positivity
    coefficient 1 - M/(4 pi kappa).  Requires kappa > M/(4 pi).
    """
    M = models.mass(rho)
    kappa_star = M / (4.0 * math.pi)
    if kappa <= kappa_star:
        raise ValueError(f"kappa must exceed M/(4 pi) = {kappa_star:.6g}, got {kappa}")
    J = functional_J(rho, c, gamma)
    gradc_term = M / (8.0 * math.pi * kappa**2) * _gradc_sq(c)
    return GradCBound(J=J, gradc_term=gradc_term, implied_C=J + gradc_term,
                      coefficient=1.0 - M / (4.0 * math.pi * kappa))


def _integral_exp_abs(h: Field2D) -> float:
    """Quadrature of int exp|h| robust to the kinks of |h|.

    Richardson combination (4*T_N - T_{N/2})/3 of the periodic trapezoid
    rule: spectrally accurate on smooth integrands and cancelling the
    leading kink error when sign changes of h fall on the coarse grid.
    """
    e = np.exp(np.abs(h.data))
    t_fine = e.mean()
    t_coarse = e[::2, ::2].mean()
    return float((4.0 * t_fine - t_coarse) / 3.0)


def trudinger_moser_gap(h: Field2D) -> float:
    """log int exp|h| - (1/(8 pi)) int |grad h|^2 for mean-zero h.

    Used as a monitor whose sample maximum calibrates the torus
    exponential-integrability constant.
    """
    if abs(fields.mean(h)) >= 1e-10:
        raise ValueError("trudinger_moser_gap requires a mean-zero field")
    return math.log(_integral_exp_abs(h)) - _gradc_sq(h) / (8.0 * math.pi)


@dataclass(frozen=True)
class AssumptionRecord:
    mass: float
    min_rho: float
    linf_rho: float
    linf_rhov: float
    eps_sqrt_rho_v_l2: float   # ||eps sqrt(rho) v||_L2
    sqrt_rho_v_l2: float       # ||sqrt(rho) v||_L2


def assumption_monitor(state: State, params: ModelParams) -> AssumptionRecord:
    """The quantities the a-priori assumptions and uniform bounds control."""
    v1, v2 = models.velocity(state)
    rho_v2 = fields.mean(state.rho * (v1 * v1 + v2 * v2))
    linf_rhov = max(fields.lp_norm(state.m, np.inf), fields.lp_norm(state.n, np.inf))
    return AssumptionRecord(
        mass=models.mass(state.rho),
        min_rho=state.rho.min(),
        linf_rho=fields.lp_norm(state.rho, np.inf),
        linf_rhov=linf_rhov,
        eps_sqrt_rho_v_l2=params.epsilon * math.sqrt(rho_v2),
        sqrt_rho_v_l2=math.sqrt(rho_v2),
    )


def compare_to_limit(rho_eps: Field2D, rho_0: Field2D):
    """(L1, L2, Linf) norms of the difference to the limit density."""
    diff = rho_eps - rho_0
    return (fields.lp_norm(diff, 1), fields.lp_norm(diff, 2), fields.lp_norm(diff, np.inf))


@dataclass
class ConvergenceTable:
    """Per-epsilon errors against the limit solution with observed orders.

    Orders are adjacent-pair slopes log(e_i/e_{i+1}) / log(eps_i/eps_{i+1});
    the first row has no order.  Failed runs carry NaN errors.
    """

    epsilons: list[float] = field(default_factory=list)
    err_l1: list[float] = field(default_factory=list)
    err_l2: list[float] = field(default_factory=list)
    err_linf: list[float] = field(default_factory=list)

    def add_row(self, epsilon: float, e1: float, e2: float, einf: float) -> None:
        if self.epsilons and epsilon >= self.epsilons[-1]:
            raise ValueError("epsilons must be strictly decreasing")
        self.epsilons.append(epsilon)
        self.err_l1.append(e1)
        self.err_l2.append(e2)
        self.err_linf.append(einf)

    @property
    def orders_l2(self) -> list[float]:
        out = []
        for i in range(1, len(self.epsilons)):
            e_prev, e_next = self.err_l2[i - 1], self.err_l2[i]
            ratio = self.epsilons[i - 1] / self.epsilons[i]
            if e_prev > 0 and e_next > 0 and math.isfinite(e_prev) and math.isfinite(e_next):
                out.append(math.log(e_prev / e_next) / math.log(ratio))
            else:
                out.append(float("nan"))
        return out

    def to_csv(self, path) -> None:
        orders = [float("nan")] + self.orders_l2
        with open(path, "w", newline="") as fh:
            fh.write("epsilon,err_l1,err_l2,err_linf,order_l2\n")
            for eps, e1, e2, einf, o in zip(self.epsilons, self.err_l1,
                                            self.err_l2, self.err_linf, orders):
                fh.write(f"{eps:.17g},{e1:.17g},{e2:.17g},{einf:.17g},{o:.17g}\n")


def write_timeseries(path, reports) -> None:
    """Timeseries CSV with 17 significant digits per entry."""
    with open(path, "w", newline="") as fh:
        fh.write(TIMESERIES_HEADER + "\n")
        for r in reports:
            row = (r.t, r.mass, r.min_rho, r.kinetic, r.potential, r.energy,
                   r.J, r.dissipation_cum, r.gradc_l2, r.gradc_cum,
                   r.c_l2_cum, r.linf_rho, r.linf_m)
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")
