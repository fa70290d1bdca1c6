"""Dimension-free Weyl calculus on Gaussian Hilbert spaces, at desk scale."""

__version__ = "0.1.0"

from .gaussian_rep import GaussianRep, TruncationError
from .phase_space import PhaseVector, QuadraticForm, SymplecticMap
from .quantize import anti_wick, heat_apply, weyl_norm, weyl_quantize, weyl_translate, wick_symbol, wigner

__all__ = [
    "GaussianRep",
    "TruncationError",
    "PhaseVector",
    "QuadraticForm",
    "SymplecticMap",
    "anti_wick",
    "heat_apply",
    "weyl_norm",
    "weyl_quantize",
    "weyl_translate",
    "wick_symbol",
    "wigner",
]
