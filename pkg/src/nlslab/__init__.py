"""Numerical laboratory for the mass-constrained NLS with two power nonlinearities.

The package studies

    -Delta u = lam*u + mu*|u|**(q-2)*u + |u|**(p-2)*u,   |u|_2^2 = a**2,

on R^N for N in {1, 2, 3}, together with the time-dependent flow

    i psi_t + Delta psi + |psi|**(p-2)*psi + mu*|psi|**(q-2)*psi = 0.

Modules:
    params    parameter records, derived exponents, regime classification
    gn        interpolation-constant machinery (radial solitons, sharp constants)
    criteria  explicit existence / stability / blow-up thresholds
    fiber     scaling fibers, energy, Pohozaev functional, fiber critical points
    solvers   normalized stationary states (shooting and constrained descent)
    dynamics  split-step / Crank-Nicolson evolution, virial tests, classification
    cli       command-line front end
"""

__version__ = "0.1.0"

from .params import ModelParams, DerivedExponents, Regime, RegimeTag, derive, classify
from .dynamics import (
    WaveField,
    EvolutionTrace,
    Outcome,
    OutcomeKind,
    Prediction,
    evolve,
    classify_datum,
    prediction_experiment,
    stability_experiment,
    virial_check,
    from_radial_profile,
    scale_datum,
)

__all__ = [
    "ModelParams",
    "DerivedExponents",
    "Regime",
    "RegimeTag",
    "derive",
    "classify",
    "WaveField",
    "EvolutionTrace",
    "Outcome",
    "OutcomeKind",
    "Prediction",
    "evolve",
    "classify_datum",
    "prediction_experiment",
    "stability_experiment",
    "virial_check",
    "from_radial_profile",
    "scale_datum",
    "__version__",
]
