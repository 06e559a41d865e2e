"""
Focused Correlation Detection

T_m(z) = <z, gamma f_m> / gamma^2 for every user m, then a per-user
threshold test: user m is accused when T_m >= tau (ties accuse).

Trial events follow the simulation convention: a detection is at least one
accused colluder, a false alarm is at least one accused innocent.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from etf_fingerprinting.analysis.bounds import q_function
from etf_fingerprinting.core.channel import check_embedding_params
from etf_fingerprinting.core.errors import DimensionError, DomainError
from etf_fingerprinting.core.validators import as_vector

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class TestStatistics:
    """Normalized correlations of one extracted signal against all M fingerprints."""

    __test__ = False

    values: np.ndarray
    gamma2: float

    @property
    def M(self):
        return int(self.values.shape[0])


@dataclass(frozen=True)
class DetectionOutcome:
    tau: float
    accused: frozenset


@dataclass(frozen=True, eq=False)
class ErrorProbabilities:
    """
    Exact per-user error probabilities for a known coalition.

    type1[m] = P(T_m >= tau) for innocent m, type2[k] = P(T_k < tau) for
    colluder k. p_fa_exact is the worst innocent, p_miss_exact the
    best-detected colluder.
    """

    tau: float
    means: np.ndarray = field(repr=False)
    std: float
    type1: dict = field(repr=False)
    type2: dict = field(repr=False)

    @property
    def p_fa_exact(self):
        return max(self.type1.values(), default=0.0)

    @property
    def p_miss_exact(self):
        return min(self.type2.values())


def test_statistics(z, F, p):
    """T_m = f_m^T z / gamma for every user (dense F^T z)."""
    check_embedding_params(F, p)
    z = as_vector(z, "z", F.N)
    return TestStatistics(values=F.matrix.T @ z / p.gamma, gamma2=p.gamma ** 2)


# imported into test modules; keep pytest from collecting it
test_statistics.__test__ = False


def batch_statistics(Z, F, p):
    """Row-wise test statistics for a B x N stack of extracted signals (B x M result)."""
    check_embedding_params(F, p)
    Z = np.asarray(Z, dtype=float)
    if Z.ndim != 2 or Z.shape[1] != F.N:
        raise DimensionError(f"expected a B x {F.N} stack, got shape {Z.shape}")
    return Z @ F.matrix / p.gamma


def focused_detect(T, tau):
    """Accuse every user with T_m >= tau."""
    tau = float(tau)
    if math.isnan(tau):
        raise DomainError("tau must not be NaN")
    values = T.values if isinstance(T, TestStatistics) else np.asarray(T, dtype=float)
    accused = frozenset(int(m) for m in np.flatnonzero(values >= tau))
    return DetectionOutcome(tau=tau, accused=accused)


def trial_events(outcome, truth):
    """(detected, false_alarm) for one trial given the true coalition."""
    truth = {int(k) for k in truth}
    detected = bool(outcome.accused & truth)
    false_alarm = bool(outcome.accused - truth)
    return detected, false_alarm


def accuse(z, F, p, tau):
    return focused_detect(test_statistics(z, F, p), tau)


def exact_error_probabilities(F, spec, p, tau):
    """
    Per-user error probabilities from the exact law of the statistics.

    Given the coalition and weights, T_m ~ N(sum_k alpha_k <f_k, f_m>, sigma2 / gamma^2).
    With sigma2 = 0 the statistics are deterministic and every probability is 0 or 1.
    """
    check_embedding_params(F, p)
    tau = float(tau)
    if math.isnan(tau):
        raise DomainError("tau must not be NaN")
    means = F.matrix.T @ (F.matrix @ spec.weight_vector(F.M))
    std = math.sqrt(spec.sigma2) / p.gamma

    if std > 0:
        false_accuse = q_function((tau - means) / std)
        miss = q_function((means - tau) / std)
    else:
        false_accuse = (means >= tau).astype(float)
        miss = (means < tau).astype(float)

    members = set(spec.coalition)
    type1 = {m: float(false_accuse[m]) for m in range(F.M) if m not in members}
    type2 = {k: float(miss[k]) for k in spec.coalition}
    return ErrorProbabilities(tau=tau, means=means, std=std, type1=type1, type2=type2)
