"""Decoupled sanity check: with alpha = 0 the limit equation is porous medium.

Setting alpha = 0 removes the chemical coupling, leaving
rho_t = div(rho grad g(rho)) with g(rho) = rho^gamma.  A small cosine
perturbation of rho = 1 then decays at the linearized rate 4 pi^2 gamma,
which the spectral limit solver should reproduce to high accuracy.
"""

import math

import numpy as np

from chemorelax import fields, limits
from chemorelax.models import ModelParams, ScalingVariant

n = 32
for gamma in (0.5, 1.0, 2.0):
    p = ModelParams(alpha=0.0, beta=1.0, gamma=gamma, epsilon=0.5,
                    variant=ScalingVariant.FIRST)
    rho0 = fields.from_function(
        n, lambda x, y: 1.0 + 0.01 * np.cos(2 * np.pi * x))
    T = 0.02
    out = limits.limit_simulate(rho0, p, T, cfl=0.4)
    amp0 = np.fft.fft2(rho0.data, norm="forward")[1, 0]
    ampT = np.fft.fft2(out.rho.data, norm="forward")[1, 0]
    rate = -math.log(abs(ampT) / abs(amp0)) / T
    target = 4 * math.pi**2 * gamma
    print(f"gamma={gamma:<4g} measured rate {rate:10.4f}   "
          f"4 pi^2 gamma = {target:10.4f}   rel err {abs(rate-target)/target:.2e}")
