"""
Closed-Form Collusion Bounds

Geometric side (distance between guilty and not-guilty sets of noiseless
fingerprint averages):

    delta_2K <= (2K - 1) mu                         Gershgorin
    dist     >= sqrt((1 - delta_2K) / (K (K - 1)))  RIP distance bound
    dist      = sqrt(M / (K (K - 1) (M - 1)))       simplex, exact

Probabilistic side (focused correlation detector, Gaussian noise):

    P_I  <= Q((gamma/sigma)(tau - mu))
    P_II <= Q((gamma/sigma)((1 + mu) alpha_max - mu - tau))
    tau*  = (1 + mu) / (2K)
    minmax error between Q(d_low / 2) and Q(d_up / 2)

Bounds whose square-root argument goes negative are reported as 0; callers
that need to know use is_vacuous().
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.special

from etf_fingerprinting.core.errors import DomainError
from etf_fingerprinting.core.validators import (
    clamp_probability,
    require_int,
    require_positive,
)

logger = logging.getLogger(__name__)

_SQRT2 = math.sqrt(2.0)

# delta_2K within VACUOUS_TOL of 1 is treated as exactly 1
VACUOUS_TOL = 1e-12


@dataclass(frozen=True)
class BoundInputs:
    """Everything the probabilistic bounds depend on."""

    N: int
    M: int
    K: int
    per_dim_energy: float
    sigma2: float
    mu: float

    def __post_init__(self):
        object.__setattr__(self, "N", require_int(self.N, "N", minimum=1))
        object.__setattr__(self, "M", require_int(self.M, "M", minimum=1))
        object.__setattr__(self, "K", require_int(self.K, "K", minimum=1))
        object.__setattr__(self, "per_dim_energy", require_positive(self.per_dim_energy, "per_dim_energy"))
        object.__setattr__(self, "sigma2", require_positive(self.sigma2, "sigma2"))
        mu = require_positive(self.mu, "mu", strict=False)
        if mu > 1.0:
            raise DomainError(f"mu must lie in [0, 1], got {mu}")
        object.__setattr__(self, "mu", mu)

    @property
    def gamma(self):
        return math.sqrt(self.N * self.per_dim_energy)

    @property
    def sigma(self):
        return math.sqrt(self.sigma2)

    @property
    def snr(self):
        """gamma / sigma, the scale every Q argument is multiplied by."""
        return self.gamma / self.sigma


def bound_inputs_for(F, K, per_dim_energy=1.0, sigma2=1.0):
    """BoundInputs for a design, using its cached coherence."""
    return BoundInputs(N=F.N, M=F.M, K=K, per_dim_energy=per_dim_energy,
                       sigma2=sigma2, mu=F.coherence)


# =============================================================================
# Geometry
# =============================================================================

def gershgorin_delta_bound(mu, K):
    """Upper bound (2K - 1) mu on the RIP constant delta_2K."""
    mu = require_positive(mu, "mu", strict=False)
    K = require_int(K, "K", minimum=1)
    return (2 * K - 1) * mu


def is_vacuous(delta2K):
    """True when the RIP distance bound carries no information (delta >= 1)."""
    return float(delta2K) >= 1.0 - VACUOUS_TOL


def distance_lower_bound_rip(delta2K, K):
    """sqrt(max(0, 1 - delta_2K) / (K (K - 1)))."""
    delta2K = require_positive(delta2K, "delta2K", strict=False)
    K = require_int(K, "K")
    if K < 2:
        raise DomainError(f"distance bounds need K >= 2, got K={K}")
    gap = 0.0 if is_vacuous(delta2K) else 1.0 - delta2K
    return math.sqrt(gap / (K * (K - 1)))


def distance_lower_bound_coherence(mu, K):
    """RIP distance bound evaluated at the Gershgorin estimate of delta_2K."""
    K = require_int(K, "K")
    if K < 2:
        raise DomainError(f"distance bounds need K >= 2, got K={K}")
    return distance_lower_bound_rip(gershgorin_delta_bound(mu, K), K)


def simplex_distance_exact(M, K):
    """Exact guilty/not-guilty distance of the M-user regular simplex."""
    M = require_int(M, "M", minimum=3)
    K = require_int(K, "K", minimum=2, maximum=M - 1)
    return math.sqrt(M / (K * (K - 1) * (M - 1)))


def coherence_bound_gap(N, K):
    """
    Ratio of the coherence distance bound to the exact simplex distance.

    For the N-dimensional simplex (mu = 1/N) this is sqrt(1 - 2K / (N + 1)).
    """
    N = require_int(N, "N", minimum=1)
    K = require_int(K, "K", minimum=2)
    return math.sqrt(max(0.0, 1.0 - 2.0 * K / (N + 1)))


# =============================================================================
# Error probabilities
# =============================================================================

def q_function(x):
    """
    Standard normal upper tail Q(x) = erfc(x / sqrt 2) / 2.

    Scalars return float, arrays return arrays. +/-inf give the limits 0 and 1.

    Raises:
        DomainError: NaN input
    """
    arr = np.asarray(x, dtype=float)
    if np.any(np.isnan(arr)):
        raise DomainError("q_function argument must not be NaN")
    out = 0.5 * scipy.special.erfc(arr / _SQRT2)
    return float(out) if out.ndim == 0 else out


def type1_bound(b, tau):
    """Worst-case false accusation probability Q((gamma/sigma)(tau - mu))."""
    tau = float(tau)
    return clamp_probability(q_function(b.snr * (tau - b.mu)))


def type2_bound(b, tau, alpha_max=None):
    """
    Worst-case miss probability Q((gamma/sigma)((1 + mu) alpha_max - mu - tau)).

    alpha_max defaults to 1/K, the uniform weighting that maximizes the bound.
    """
    if alpha_max is None:
        alpha_max = 1.0 / b.K
    alpha_max = require_positive(alpha_max, "alpha_max", strict=False)
    if alpha_max > 1.0:
        raise DomainError(f"alpha_max must lie in [0, 1], got {alpha_max}")
    tau = float(tau)
    return clamp_probability(q_function(b.snr * ((1.0 + b.mu) * alpha_max - b.mu - tau)))


def optimal_threshold(mu, K):
    """tau* = (1 + mu) / (2K), midway between the innocent and colluder mean bounds."""
    mu = require_positive(mu, "mu", strict=False)
    K = require_int(K, "K", minimum=1)
    return (1.0 + mu) / (2 * K)


@dataclass(frozen=True)
class MinmaxBounds:
    """Minmax error bounds; lower and d_low are None when K < 2."""

    lower: Optional[float]
    upper: float
    d_low: Optional[float]
    d_up: float
    d_orthogonal: float
    d_simplex: Optional[float]
    d_up_vacuous: bool = False


def minmax_bounds(b):
    """
    Lower and upper bounds on the minmax error probability.

    d_low = sqrt(M/(M-1)) sqrt(N D_f) / (sigma sqrt(K(K-1)))
    d_up  = sqrt(N D_f) / (sigma K) * (1 - (2K - 1) mu)

    Once (2K - 1) mu reaches 1 the upper distance is clamped to 0, so the
    upper bound stays at Q(0) = 1/2 and d_up_vacuous is set.

    Also returns d* of orthogonal fingerprints, sqrt(N D_f)/(sigma K), and
    of the simplex, that value times M/(M-1).
    """
    scale = b.snr / b.K
    gershgorin = (2 * b.K - 1) * b.mu
    d_up_vacuous = is_vacuous(gershgorin)
    d_up = 0.0 if d_up_vacuous else scale * (1.0 - gershgorin)
    if d_up_vacuous:
        logger.debug("d_up vacuous: (2K-1) mu = %.6g", gershgorin)
    upper = clamp_probability(q_function(d_up / 2.0))
    d_simplex = scale * b.M / (b.M - 1) if b.M > 1 else None

    d_low = lower = None
    if b.K >= 2 and b.M > 1:
        d_low = math.sqrt(b.M / (b.M - 1)) * b.snr / math.sqrt(b.K * (b.K - 1))
        lower = clamp_probability(q_function(d_low / 2.0))
    else:
        logger.debug("d_low undefined for K=%d, M=%d", b.K, b.M)

    return MinmaxBounds(lower=lower, upper=upper, d_low=d_low, d_up=d_up,
                        d_orthogonal=scale, d_simplex=d_simplex,
                        d_up_vacuous=d_up_vacuous)


def asymptotic_minmax(N, K):
    """
    Large-N approximations of (d_low, d_up) at 0 dB WNR for near-Welch designs:
    d_low ~ sqrt(N)/K and d_up ~ sqrt(N)/K - 2.
    """
    N = require_int(N, "N", minimum=1)
    K = require_int(K, "K", minimum=1)
    lead = math.sqrt(N) / K
    return lead, lead - 2.0


def error_exponent(K):
    """1 / (8 K^2)."""
    K = require_int(K, "K", minimum=1)
    return 1.0 / (8.0 * K * K)


def ergun_scale(N):
    """sqrt(N / ln N): coalition size at which any fingerprint family can be overcome."""
    N = require_positive(N, "N")
    if N < 2:
        raise DomainError(f"ergun_scale needs N >= 2, got {N}")
    return math.sqrt(N / math.log(N))
