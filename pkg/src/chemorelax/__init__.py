"""Numerical laboratory for hyperbolic chemotaxis systems and their
diffusive relaxation limits on the 2D periodic torus.

Subpackages:

* :mod:`chemorelax.fields` -- pseudospectral calculus on the unit torus
* :mod:`chemorelax.models` -- model types, pressure law, RHS assembly
* :mod:`chemorelax.hyperbolic` -- stiff-robust solver for the rescaled systems
* :mod:`chemorelax.limits` -- Keller-Segel limit solver
* :mod:`chemorelax.diagnostics` -- energy identities, bounds, error tables
* :mod:`chemorelax.picard` -- linearized iteration near constant states
* :mod:`chemorelax.harness` / :mod:`chemorelax.cli` -- configs, sweeps, CLI
"""

from . import diagnostics, fields, harness, hyperbolic, limits, models, picard
from .fields import Field2D, SpectralField2D
from .models import ModelParams, ScalingVariant, State

__all__ = [
    "fields", "models", "hyperbolic", "limits", "diagnostics", "picard",
    "harness", "Field2D", "SpectralField2D", "ModelParams", "ScalingVariant",
    "State",
]

__version__ = "0.1.0"
