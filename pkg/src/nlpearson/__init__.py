"""Non-local Pearson diffusions: spectral densities, non-local Kolmogorov
solvers, dependence structure, and a Monte Carlo cross-validation engine."""

from . import bernstein, montecarlo, pearson, relaxation, solver, spectral, subordination
from .bernstein import (
    CustomBernstein,
    GammaBernstein,
    GeometricStableBernstein,
    StableBernstein,
    TemperedStableBernstein,
)
from .pearson import PolynomialSystem, make_family
from .spectral import SpectralExpansion

__all__ = [
    "bernstein",
    "montecarlo",
    "pearson",
    "relaxation",
    "solver",
    "spectral",
    "subordination",
    "StableBernstein",
    "TemperedStableBernstein",
    "GeometricStableBernstein",
    "GammaBernstein",
    "CustomBernstein",
    "PolynomialSystem",
    "SpectralExpansion",
    "make_family",
]

__version__ = "0.1.0"
