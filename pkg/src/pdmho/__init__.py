"""Exactly solvable harmonic oscillator with position-dependent mass m(r) = m0 / (1 + alpha r^2)^2.

Closed-form spectra and wavefunctions, the quadratic algebra behind them,
finite-difference checks of every identity, and an independent
Sturm-Liouville eigensolver used as an oracle.
"""

__version__ = "0.1.0"

from .model import DomainError, Line, ModelParams, Radial, DerivedParams, params_from_dict, parse_sector
from .spectrum import energy, line_energy, psi, psi_many
from .grid import GridFunction, RadialGrid, ResidualReport, make_grid

__all__ = [
    "__version__",
    "DomainError",
    "Line",
    "Radial",
    "ModelParams",
    "DerivedParams",
    "params_from_dict",
    "parse_sector",
    "energy",
    "line_energy",
    "psi",
    "psi_many",
    "GridFunction",
    "RadialGrid",
    "ResidualReport",
    "make_grid",
]
