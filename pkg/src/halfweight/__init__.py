"""Exact computations for Siegel modular forms of half-integral weight.

Fourier expansions and theta series, the Siegel Phi operator, local Hecke
operators and Satake maps, standard L-function Euler factors, holomorphic
projection constants, character sums and special-value bookkeeping.
"""

from ._accel import BACKEND
from .characters import DirichletCharacter, gauss_sum, jacobi_sum, rho_tau
from .cyclotomic import Cyclotomic
from .fourier import FourierExpansion, LazyExpansion, gram, siegel_phi, theta_lattice
from .symmat import HalfIntSymMat

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "Cyclotomic",
    "DirichletCharacter",
    "FourierExpansion",
    "HalfIntSymMat",
    "LazyExpansion",
    "gauss_sum",
    "gram",
    "jacobi_sum",
    "rho_tau",
    "siegel_phi",
    "theta_lattice",
]
