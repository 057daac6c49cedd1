"""Sieving, densities, Toeplitz approximants and block entropy for B-free systems."""

from .core import (BSpec, BTruncation, ExplicitB, FileListB, PrimeSquares, ScaledPrimes, UnionB,
                   Window, eta_window, parse_bspec, sieve_multiples, truncate)
from .density import DensityEnclosure, davenport_erdos_profile, exact_density_multiples
from .errors import BFreeError, InputError

__version__ = "0.1.0"

__all__ = [
    "BSpec", "BTruncation", "ExplicitB", "FileListB", "PrimeSquares", "ScaledPrimes", "UnionB",
    "Window", "eta_window", "parse_bspec", "sieve_multiples", "truncate",
    "DensityEnclosure", "davenport_erdos_profile", "exact_density_multiples",
    "BFreeError", "InputError",
]
