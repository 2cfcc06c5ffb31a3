"""Tests for the Keller-Segel limit solver."""

import math

import numpy as np
import pytest

from chemorelax import fields, harness, limits, models
from chemorelax.fields import Field2D
from chemorelax.harness import RunConfig
from chemorelax.models import DensityFloorError, ModelParams, ScalingVariant


def limit_params(variant, gamma=1.0, alpha=1.0, beta=1.0):
    if variant is ScalingVariant.SECOND_POISSON:
        beta = 0.0
    return ModelParams(alpha=alpha, beta=beta, gamma=gamma, epsilon=0.5,
                       variant=variant)


def test_limit_rhs_constant_is_zero():
    p = limit_params(ScalingVariant.FIRST)
    st = models.stationary_state(p, 1.0, 32)
    out = limits.limit_rhs(st.rho, st.c, p)
    assert np.all(out.data == 0.0)


def test_limit_rhs_zero_mean():
    rng = np.random.default_rng(21)
    p = limit_params(ScalingVariant.FIRST, gamma=2.0)
    rho = Field2D(1.0 + 0.4 * rng.random((32, 32)))
    c = Field2D(rng.standard_normal((32, 32)))
    assert abs(fields.mean(limits.limit_rhs(rho, c, p))) < 1e-13


def test_limit_rhs_analytic_oracle():
    # rho = 1 makes g(rho) constant, so the rhs reduces to -Lap c
    n = 32
    p = limit_params(ScalingVariant.FIRST, gamma=1.7)
    rho = fields.constant(n, 1.0)
    c = fields.from_function(n, lambda x, y: np.cos(2 * np.pi * x))
    exact = c * (4 * np.pi**2)
    assert fields.lp_norm(limits.limit_rhs(rho, c, p) - exact, np.inf) < 1e-10


def test_limit_rhs_gauge_invariance():
    rng = np.random.default_rng(22)
    p = limit_params(ScalingVariant.SECOND_POISSON)
    rho = Field2D(1.0 + 0.3 * rng.random((32, 32)))
    c = Field2D(rng.standard_normal((32, 32)))
    a = limits.limit_rhs(rho, c, p)
    b = limits.limit_rhs(rho, c + 7.5, p)
    # only grad c enters; the shifted constant survives only as FFT round-off
    scale = fields.lp_norm(a, np.inf)
    assert fields.lp_norm(a - b, np.inf) < 1e-11 * scale


@pytest.mark.parametrize("variant", list(ScalingVariant))
def test_limit_step_fixed_point(variant):
    p = limit_params(variant)
    st = models.stationary_state(p, 1.0, 32)
    rho, c = limits.limit_step(st.rho, st.c, p, 1e-4)
    assert np.all(rho.data == st.rho.data)
    assert fields.lp_norm(c - st.c, np.inf) < 1e-15


def test_limit_step_guards():
    p = limit_params(ScalingVariant.FIRST)
    st = models.stationary_state(p, 1.0, 16)
    with pytest.raises(ValueError):
        limits.limit_step(st.rho, st.c, p, 0.0)
    with pytest.raises(DensityFloorError):
        limits.limit_step(fields.constant(16, 1e-9), st.c, p, 1e-5)


def test_porous_medium_decay_rate():
    # alpha = 0 decouples c; the linearized mode-(1,0) decay rate of
    # rho_t = div(rho grad g(rho)) about rho = 1 is 4 pi^2 gamma
    n = 32
    gamma = 1.0
    p = ModelParams(alpha=0.0, beta=1.0, gamma=gamma, epsilon=0.5,
                    variant=ScalingVariant.FIRST)
    rho0 = fields.from_function(n, lambda x, y: 1.0 + 0.01 * np.cos(2 * np.pi * x))
    T = 0.02
    out = limits.limit_simulate(rho0, p, T, cfl=0.4)
    amp0 = np.fft.fft2(rho0.data, norm="forward")[1, 0]
    ampT = np.fft.fft2(out.rho.data, norm="forward")[1, 0]
    rate = -math.log(abs(ampT) / abs(amp0)) / T
    target = 4 * math.pi**2 * gamma
    assert abs(rate - target) / target < 0.05


@pytest.mark.parametrize("variant", list(ScalingVariant))
def test_limit_self_convergence(variant):
    cfg = RunConfig(variant=variant, n=32, epsilons=(0.5,), ic_kind="two_mode",
                    amplitude=0.05)
    p = cfg.params(0.5)
    st = harness.make_initial_data(cfg, 0.5)
    T = 0.01
    sols = [limits.limit_simulate(st.rho, p, T, dt=T / nst, c0=st.c).rho
            for nst in (64, 128, 256)]
    order = math.log2(fields.lp_norm(sols[0] - sols[1], 2)
                      / fields.lp_norm(sols[1] - sols[2], 2))
    assert order > 1.7


def test_limit_mass_conservation_and_identity():
    cfg = RunConfig(variant=ScalingVariant.FIRST, n=32, epsilons=(0.5,),
                    ic_kind="single_mode", amplitude=0.05)
    p = cfg.params(0.5)
    st = harness.make_initial_data(cfg, 0.5)

    out = limits.limit_simulate(st.rho, p, 0.0)
    assert out.steps == 0 and np.array_equal(out.rho.data, st.rho.data)

    out = limits.limit_simulate(st.rho, p, 0.01, cfl=0.4)
    assert abs(models.mass(out.rho) - models.mass(st.rho)) < 1e-12


def test_limit_constant_data_constant_trajectory():
    p = limit_params(ScalingVariant.THIRD_PARABOLIC)
    st = models.stationary_state(p, 2.0, 16)
    seen = []
    limits.limit_simulate(st.rho, p, 0.005, observers=[seen.append], c0=st.c)
    assert len(seen) >= 2
    for s in seen:
        assert np.all(s.rho.data == 2.0)
        assert fields.lp_norm(s.c - st.c, np.inf) < 1e-14


def test_min_density_does_not_collapse():
    # comparison-principle smoke test: gamma=1, amplitude 0.1, horizon O(1)
    cfg = RunConfig(variant=ScalingVariant.FIRST, n=32, epsilons=(0.5,),
                    ic_kind="two_mode", amplitude=0.1)
    p = cfg.params(0.5)
    st = harness.make_initial_data(cfg, 0.5)
    mins = []
    limits.limit_simulate(st.rho, p, 1.0, observers=[lambda s: mins.append(s.rho.min())],
                          observe_every=50)
    assert min(mins) > st.rho.min() - 1e-3
    assert min(mins) > 10 * p.rho_floor
