"""
Brute-Force Oracles

Exact RIP constants and guilty/not-guilty distances by enumeration. These
are oracles for small designs: every enumeration is guarded by
MAX_ENUMERATION and raises CapacityError above it.
"""

import itertools
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from etf_fingerprinting.core.designs import DesignMatrix, gram_matrix
from etf_fingerprinting.core.errors import CapacityError, DomainError
from etf_fingerprinting.core.validators import require_index, require_int

logger = logging.getLogger(__name__)

MAX_ENUMERATION = 10 ** 6

# Subsets per batched eigensolve / coalitions per distance block
_SUBSET_BATCH = 4096
_DISTANCE_BLOCK = 1 << 22


def _batches(iterable, size):
    it = iter(iterable)
    while True:
        chunk = list(itertools.islice(it, size))
        if not chunk:
            return
        yield np.array(chunk, dtype=np.intp)


def rip_delta_bruteforce(F, K, max_subsets=MAX_ENUMERATION):
    """
    Smallest delta for which F is (K, delta)-RIP.

    max over all size-K column subsets S of ||F_S^T F_S - I||_2, with each
    batch of K x K Gram blocks handed to numpy's symmetric eigensolver.

    Raises:
        DomainError: K outside 1..M
        CapacityError: C(M, K) above max_subsets
    """
    K = require_int(K, "K", minimum=1, maximum=F.M)
    count = math.comb(F.M, K)
    if count > max_subsets:
        raise CapacityError(
            f"C({F.M}, {K}) = {count} subsets exceeds the enumeration guard {max_subsets}; "
            f"use gershgorin_delta_bound(mu, K) for an upper bound instead"
        )
    G = gram_matrix(F)
    eye = np.eye(K)
    worst = 0.0
    for idx in _batches(itertools.combinations(range(F.M), K), _SUBSET_BATCH):
        blocks = G[idx[:, :, None], idx[:, None, :]] - eye
        eig = np.linalg.eigvalsh(blocks)
        worst = max(worst, float(np.abs(eig).max()))
    logger.debug("delta_%d = %.6g over %d subsets", K, worst, count)
    return worst


@dataclass(frozen=True, eq=False)
class GuiltySetSpec:
    """User m and the largest coalition size K defining the guilty sets."""

    F: DesignMatrix
    m: int
    K: int

    def __post_init__(self):
        object.__setattr__(self, "K", require_int(self.K, "K", minimum=2, maximum=self.F.M))
        object.__setattr__(self, "m", require_index(self.m, self.F.M))


def coalition_count(M, K):
    """Number of nonempty coalitions of size at most K."""
    return sum(math.comb(M, k) for k in range(1, K + 1))


def _coalition_means(X, members, size):
    """Uniform averages of every size-``size`` coalition drawn from ``members``."""
    rows = [X[idx].mean(axis=1)
            for idx in _batches(itertools.combinations(members, size), _SUBSET_BATCH)]
    return np.concatenate(rows) if rows else np.empty((0, X.shape[1]))


def distance_exact_bruteforce(spec, max_coalitions=MAX_ENUMERATION):
    """
    Exact distance between the guilty and not-guilty sets of user m.

    min ||mean_{k in A} f_k - mean_{k in B} f_k|| over coalitions A containing
    m and B not containing m, both of size at most K, with uniform weights.

    Raises:
        CapacityError: more than max_coalitions coalitions to enumerate
    """
    F, m, K = spec.F, spec.m, spec.K
    count = coalition_count(F.M, K)
    if count > max_coalitions:
        raise CapacityError(
            f"{count} coalitions of size <= {K} exceeds the enumeration guard {max_coalitions}"
        )
    if F.M < 2:
        raise DomainError("distance needs at least two users")

    X = F.matrix.T
    others = [j for j in range(F.M) if j != m]
    guilty = [X[m][None, :]]
    innocent = []
    for size in range(1, K + 1):
        innocent.append(_coalition_means(X, others, size))
        if size >= 2:
            # coalitions with m: m plus (size - 1) others
            rest = _coalition_means(X, others, size - 1)
            guilty.append((X[m][None, :] + (size - 1) * rest) / size)
    guilty = np.concatenate(guilty)
    innocent = np.concatenate(innocent)

    step = max(1, _DISTANCE_BLOCK // max(1, innocent.shape[0]))
    best = math.inf
    for start in range(0, guilty.shape[0], step):
        block = cdist(guilty[start:start + step], innocent)
        best = min(best, float(block.min()))
    logger.debug("exact distance for user %d, K=%d: %.6g", m, K, best)
    return best
