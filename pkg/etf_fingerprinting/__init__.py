"""ETF fingerprinting: collusion-resistant fingerprint designs and their analysis.

Public API re-exports so users can write::

    from etf_fingerprinting import steiner_etf, steiner_pairs_incidence, sylvester_hadamard
"""

__version__ = "1.0.0"

from etf_fingerprinting.core.designs import (
    coherence,
    orthogonal_design,
    simplex_design,
    steiner_etf,
    steiner_pairs_incidence,
    sylvester_hadamard,
    verify_etf,
    welch_bound,
)
from etf_fingerprinting.core.channel import (
    AttackSpec,
    EmbeddingParams,
    embed,
    extract,
    forge,
    wnr,
)
from etf_fingerprinting.core.detection import focused_detect, trial_events
from etf_fingerprinting.core.errors import FingerprintError

__all__ = [
    "__version__",
    # Designs
    "coherence",
    "orthogonal_design",
    "simplex_design",
    "steiner_etf",
    "steiner_pairs_incidence",
    "sylvester_hadamard",
    "verify_etf",
    "welch_bound",
    # Channel
    "AttackSpec",
    "EmbeddingParams",
    "embed",
    "extract",
    "forge",
    "wnr",
    # Detection
    "focused_detect",
    "trial_events",
    "FingerprintError",
]
