"""Decay of unstable states from resonance poles of the density of states.

Modules: ``special`` (branch-aware complex special functions), ``dos``
(density of states), ``survival`` (A(t) and P(t)), ``autocorr``
(Wiener-Khinchin pair), ``moments`` (Hamiltonian moments and Taylor
coefficients), ``regions`` (critical times and time regions) and ``cli``.
"""

from .dos import (
    ConstantFormFactor,
    DensityOfStates,
    ExponentialFormFactor,
    GaussianFormFactor,
    Pole,
    PoleSet,
    build_dos,
    eval_dos,
    narrow_resonance,
)
from .errors import ConfigError, DecayKitError
from .survival import amplitude, survival_probability

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "ConstantFormFactor",
    "DecayKitError",
    "DensityOfStates",
    "ExponentialFormFactor",
    "GaussianFormFactor",
    "Pole",
    "PoleSet",
    "amplitude",
    "build_dos",
    "eval_dos",
    "narrow_resonance",
    "survival_probability",
]
