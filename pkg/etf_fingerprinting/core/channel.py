"""
Embedding and Collusion Channel

Marked copy of user m:      x_m = s + gamma * f_m,   gamma = sqrt(N * D_f)
Linear-average collusion:   y = sum_k alpha_k (s + gamma * f_k) + eps,
                            eps ~ N(0, sigma2) independently per dimension
Extraction:                 z = y - s

The host-recovery objective g(x) = sum_k (||x - c_k||^2 - mean_j ||x - c_j||^2)^2
vanishes at x = s whenever every fingerprint has the same energy; it is the
unique minimizer once the colluders' fingerprints span R^N affinely
(which needs at least N + 1 copies).
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from etf_fingerprinting.core.errors import (
    ConvergenceError,
    DimensionError,
    DomainError,
)
from etf_fingerprinting.core.validators import (
    as_vector,
    require_index,
    require_int,
    require_positive,
    validate_weights,
)

logger = logging.getLogger(__name__)

MASK64 = (1 << 64) - 1

# Armijo backtracking controls for recover_host
ARMIJO_SLOPE = 1e-4
BACKTRACK_SHRINK = 0.5
MAX_DESCENT_ITERATIONS = 100_000
OBJECTIVE_TARGET = 1e-12


# =============================================================================
# Domain types
# =============================================================================

@dataclass(frozen=True)
class EmbeddingParams:
    """Fingerprint energy: D_f per dimension over N dimensions."""

    per_dim_energy: float
    N: int

    def __post_init__(self):
        object.__setattr__(
            self, "per_dim_energy", require_positive(self.per_dim_energy, "per_dim_energy")
        )
        object.__setattr__(self, "N", require_int(self.N, "N", minimum=1))

    @property
    def gamma(self):
        return math.sqrt(self.N * self.per_dim_energy)

    @classmethod
    def for_design(cls, F, per_dim_energy=1.0):
        return cls(per_dim_energy=per_dim_energy, N=F.N)

    @classmethod
    def from_gamma(cls, gamma, N):
        gamma = require_positive(gamma, "gamma")
        N = require_int(N, "N", minimum=1)
        return cls(per_dim_energy=gamma * gamma / N, N=N)


@dataclass(frozen=True)
class AttackSpec:
    """
    Parameters of one linear-averaging attack.

    Coalition members are zero-based user indices, stored sorted. Weights
    are checked on construction: nonnegative, at most one, summing to one
    within WEIGHT_SUM_TOL, keyed exactly by the coalition.
    """

    coalition: tuple
    weights: dict
    sigma2: float = 0.0
    seed: int = 0

    def __post_init__(self):
        weights = validate_weights(self.coalition, self.weights)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "coalition", tuple(weights))
        object.__setattr__(self, "sigma2", require_positive(self.sigma2, "sigma2", strict=False))
        object.__setattr__(self, "seed", require_int(self.seed, "seed", minimum=0, maximum=MASK64))

    @property
    def size(self):
        return len(self.coalition)

    @property
    def alpha_max(self):
        return max(self.weights.values())

    def weight_vector(self, M):
        """Dense length-M weight vector (zeros outside the coalition)."""
        alpha = np.zeros(M)
        for k, w in self.weights.items():
            alpha[require_index(k, M, "coalition member")] = w
        return alpha


@dataclass(frozen=True, eq=False)
class Forgery:
    y: np.ndarray
    spec: AttackSpec


@dataclass(frozen=True, eq=False)
class HostRecovery:
    """Result of recover_host; converged means objective <= the target."""

    x: np.ndarray = field(repr=False)
    objective: float
    iterations: int
    converged: bool
    identifiable: bool


# =============================================================================
# Embedding and attack
# =============================================================================

def check_embedding_params(F, p):
    if p.N != F.N:
        raise DimensionError(f"embedding params are for N={p.N}, design has N={F.N}")


def embed(s, F, p, m):
    """Marked copy s + gamma * f_m for zero-based user m."""
    check_embedding_params(F, p)
    s = as_vector(s, "host", F.N)
    m = require_index(m, F.M)
    return s + p.gamma * F.column(m)


def embed_all(s, F, p):
    """N x M matrix whose column m is the marked copy of user m."""
    check_embedding_params(F, p)
    s = as_vector(s, "host", F.N)
    return s[:, None] + p.gamma * F.matrix


def uniform_attack(coalition, sigma2=0.0, seed=0):
    """AttackSpec with alpha_k = 1/|coalition| for every member."""
    members = sorted({int(k) for k in coalition})
    if not members:
        raise DomainError("coalition must contain at least one user")
    weight = 1.0 / len(members)
    return AttackSpec(coalition=tuple(members), weights={k: weight for k in members},
                      sigma2=sigma2, seed=seed)


def forge(s, F, p, a, rng=None):
    """
    Linear-average forgery plus Gaussian noise.

    Noise is drawn from ``rng`` when given, otherwise from a generator seeded
    with ``a.seed``. With sigma2 = 0 no draw is made and the result is exact.
    """
    check_embedding_params(F, p)
    s = as_vector(s, "host", F.N)
    members = [require_index(k, F.M, "coalition member") for k in a.coalition]
    alpha = np.array([a.weights[k] for k in members])

    copies = s[:, None] + p.gamma * F.matrix[:, members]
    y = copies @ alpha
    if a.sigma2 > 0:
        if rng is None:
            rng = np.random.default_rng(a.seed)
        y = y + rng.normal(0.0, math.sqrt(a.sigma2), size=F.N)
    logger.debug("forged |K|=%d sigma2=%g seed=%d", a.size, a.sigma2, a.seed)
    return Forgery(y=y, spec=a)


def extract(y, s):
    """z = y - s."""
    y = y.y if isinstance(y, Forgery) else y
    y = as_vector(y, "forgery")
    s = as_vector(s, "host")
    if y.shape != s.shape:
        raise DimensionError(f"forgery has length {y.shape[0]}, host has length {s.shape[0]}")
    return y - s


def wnr(D_f, sigma2):
    """Watermark-to-noise ratio 10 log10(D_f / sigma2) in dB."""
    D_f = require_positive(D_f, "D_f")
    sigma2 = require_positive(sigma2, "sigma2")
    return 10.0 * math.log10(D_f / sigma2)


# =============================================================================
# Host recovery
# =============================================================================

def _as_copies(copies):
    C = np.asarray(copies, dtype=float)
    if C.ndim != 2:
        raise DimensionError(f"copies must be a list of equal-length vectors, got shape {C.shape}")
    if C.shape[0] < 2:
        raise DomainError(f"host recovery needs at least 2 copies, got {C.shape[0]}")
    if not np.all(np.isfinite(C)):
        raise DomainError("copies must contain only finite entries")
    return C


def _residuals(x, C):
    d = np.sum((x[None, :] - C) ** 2, axis=1)
    return d - d.mean()


def host_recovery_objective(x, copies):
    """g(x): squared spread of the distances from x to every copy."""
    C = _as_copies(copies)
    x = as_vector(x, "x", C.shape[1])
    e = _residuals(x, C)
    return float(e @ e)


def host_recovery_gradient(x, copies):
    """grad g(x) = 4 sum_k e_k (cbar - c_k)."""
    C = _as_copies(copies)
    x = as_vector(x, "x", C.shape[1])
    e = _residuals(x, C)
    return 4.0 * (e @ (C.mean(axis=0)[None, :] - C))


def recover_host(
    copies,
    init=None,
    max_iter=MAX_DESCENT_ITERATIONS,
    target=OBJECTIVE_TARGET,
    slope=ARMIJO_SLOPE,
    shrink=BACKTRACK_SHRINK,
    initial_step=1.0,
    strict=False,
):
    """
    Minimize g by gradient descent with Armijo backtracking.

    Each iteration starts its line search at twice the previously accepted
    step. Stops once g <= target or after max_iter iterations.

    Args:
        copies: K x N marked copies held by the coalition
        init: Starting point (defaults to the mean of the copies)
        strict: Raise ConvergenceError instead of reporting non-convergence

    Returns:
        HostRecovery. ``identifiable`` is False when the copies lie in a
        common affine hyperplane (fewer than N + 1 affinely independent
        copies), in which case the minimizer is not unique.
    """
    C = _as_copies(copies)
    N = C.shape[1]
    center = C.mean(axis=0)
    x = center.copy() if init is None else as_vector(init, "init", N).copy()
    identifiable = bool(np.linalg.matrix_rank(C - center) == N)
    if not identifiable:
        logger.warning(
            "copies do not determine the host uniquely (%d copies in R^%d)", C.shape[0], N
        )

    g = host_recovery_objective(x, C)
    step = float(initial_step) / 2.0
    iterations = 0
    while g > target and iterations < max_iter:
        grad = host_recovery_gradient(x, C)
        slope_sq = float(grad @ grad)
        if slope_sq == 0.0:
            break
        step *= 2.0
        while True:
            candidate = x - step * grad
            g_new = host_recovery_objective(candidate, C)
            if g_new <= g - slope * step * slope_sq:
                break
            step *= shrink
            if step < np.finfo(float).tiny:
                break
        if step < np.finfo(float).tiny:
            logger.debug("line search stalled at g=%.3g after %d iterations", g, iterations)
            break
        x, g = candidate, g_new
        iterations += 1

    converged = g <= target
    if not converged:
        message = f"recover_host stopped after {iterations} iterations with g={g:.3g}"
        if strict:
            raise ConvergenceError(message)
        logger.info(message)
    return HostRecovery(x=x, objective=g, iterations=iterations,
                        converged=converged, identifiable=identifiable)
