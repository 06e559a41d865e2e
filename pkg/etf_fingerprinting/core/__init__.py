"""
Core fingerprinting model: designs, channel, detection and file formats.
"""

from .designs import (
    DesignMatrix,
    HadamardMatrix,
    SteinerIncidence,
    coherence,
    orthogonal_design,
    simplex_design,
    steiner_etf,
    steiner_pairs_incidence,
    sylvester_hadamard,
    verify_etf,
    welch_bound,
)
from .errors import FingerprintError

__all__ = [
    "DesignMatrix",
    "HadamardMatrix",
    "SteinerIncidence",
    "coherence",
    "orthogonal_design",
    "simplex_design",
    "steiner_etf",
    "steiner_pairs_incidence",
    "sylvester_hadamard",
    "verify_etf",
    "welch_bound",
    "FingerprintError",
]
