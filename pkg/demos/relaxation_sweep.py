"""Measure how fast the hyperbolic model approaches its drift-diffusion limit.

Runs the first-scaling solver for a decreasing list of epsilon values from
the same perturbed initial density, runs the limit solver once, and prints
the final-time L2 errors with observed orders.  Uses a small grid and short
horizon so the whole thing takes a few seconds; bump n/T for sharper orders.
"""

import numpy as np

from chemorelax import harness
from chemorelax.harness import RunConfig
from chemorelax.models import ScalingVariant

cfg = RunConfig(
    variant=ScalingVariant.FIRST,
    n=32,
    gamma=1.0,
    alpha=1.0,
    beta=1.0,
    epsilons=(0.4, 0.2, 0.1, 0.05),
    T=0.05,
    ic_kind="two_mode",
    amplitude=0.05,
)

table = harness.run_sweep(cfg)

print("eps        err_l1       err_l2       err_linf     order_l2")
orders = [float("nan")] + table.orders_l2
for eps, e1, e2, einf, o in zip(table.epsilons, table.err_l1, table.err_l2,
                                table.err_linf, orders):
    print(f"{eps:<10g} {e1:<12.4e} {e2:<12.4e} {einf:<12.4e} {o:.3f}"
          if not np.isnan(o) else
          f"{eps:<10g} {e1:<12.4e} {e2:<12.4e} {einf:<12.4e} -")

print()
print("errors strictly decreasing:",
      all(b < a for a, b in zip(table.err_l2, table.err_l2[1:])))
