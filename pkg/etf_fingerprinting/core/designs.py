"""
Fingerprint Designs

Constructs and validates the N x M fingerprint ensembles F = [f_1, ..., f_M]:

    etf         Steiner system incidence tensored with Hadamard rows,
                columns scaled by 1/sqrt(r); mu = 1/r = Welch bound
    simplex     N+1 unit vectors with pairwise inner products -1/N
    orthogonal  N x N identity
    imported    any unit-norm matrix read from disk

Fingerprints are stored unit-norm. Energy scaling gamma = sqrt(N * D_f)
is applied by the channel, never here.

User indices are zero-based throughout the package.
"""

import itertools
import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from etf_fingerprinting.core.errors import (
    CapacityError,
    DimensionError,
    DomainError,
    ValidationError,
)
from etf_fingerprinting.core.validators import DEFAULT_TOL, require_int

logger = logging.getLogger(__name__)

DESIGN_KINDS = ("etf", "simplex", "orthogonal", "imported")

# Sylvester order guard: 2**20 rows
MAX_SYLVESTER_POWER = 20

# Columns per block when scanning Gram matrices of large designs
_GRAM_BLOCK = 2048


# =============================================================================
# Domain types
# =============================================================================

@dataclass(frozen=True, eq=False)
class HadamardMatrix:
    """Square +/-1 matrix with mutually orthogonal rows."""

    entries: np.ndarray

    @property
    def order(self):
        return int(self.entries.shape[0])


@dataclass(frozen=True, eq=False)
class SteinerIncidence:
    """
    b x v block/point 0-1 incidence matrix of a (2, k, v)-Steiner system.

    Rows are blocks, columns are points. Every point lies in r blocks and
    every pair of points lies in exactly one block.
    """

    entries: np.ndarray
    k: int

    @property
    def b(self):
        return int(self.entries.shape[0])

    @property
    def v(self):
        return int(self.entries.shape[1])

    @property
    def r(self):
        return (self.v - 1) // (self.k - 1)


@dataclass(frozen=True, eq=False)
class DesignMatrix:
    """N x M real fingerprint ensemble with unit-norm columns and cached coherence."""

    kind: str
    matrix: np.ndarray = field(repr=False)
    coherence: float

    @property
    def N(self):
        return int(self.matrix.shape[0])

    @property
    def M(self):
        return int(self.matrix.shape[1])

    def column(self, m):
        return self.matrix[:, m]


# =============================================================================
# Structural checks
# =============================================================================

def check_hadamard(entries):
    """
    Validate a candidate Hadamard matrix and wrap it.

    Raises:
        ValidationError: Non-square, entries outside {+1, -1}, or a pair of
            non-orthogonal rows (the first offending pair is named)
    """
    H = np.asarray(entries)
    if H.ndim != 2 or H.shape[0] != H.shape[1] or H.shape[0] == 0:
        raise ValidationError(f"Hadamard matrix must be square and nonempty, got shape {H.shape}")
    if not np.all((H == 1) | (H == -1)):
        raise ValidationError("Hadamard entries must be exactly +1 or -1")
    H = H.astype(np.int8)
    n = H.shape[0]
    gram = H.astype(np.int64) @ H.T.astype(np.int64)
    off = gram - n * np.eye(n, dtype=np.int64)
    bad = np.argwhere(off != 0)
    if bad.size:
        i, j = (int(x) for x in bad[0])
        raise ValidationError(f"rows {i} and {j} of the Hadamard matrix are not orthogonal")
    return HadamardMatrix(entries=H)


def check_steiner(entries, k=None):
    """
    Validate a 0-1 incidence matrix as a (2, k, v)-Steiner system.

    Args:
        entries: b x v array of 0/1 values (rows = blocks, columns = points)
        k: Expected block size (inferred from the first row when None)

    Returns:
        SteinerIncidence

    Raises:
        ValidationError: Naming the offending column pair when two points do
            not share exactly one block, or the violated count identity
    """
    A = np.asarray(entries)
    if A.ndim != 2 or A.shape[0] == 0 or A.shape[1] < 2:
        raise ValidationError(f"incidence must be b x v with b >= 1 and v >= 2, got shape {A.shape}")
    if not np.all((A == 0) | (A == 1)):
        raise ValidationError("incidence entries must be 0 or 1")
    A = A.astype(np.uint8)
    b, v = A.shape

    # t = 2 property: every pair of distinct points shares exactly one block
    shared = A.T.astype(np.int64) @ A.astype(np.int64)
    np.fill_diagonal(shared, 1)
    bad = np.argwhere(shared != 1)
    if bad.size:
        i, j = (int(x) for x in bad[0])
        raise ValidationError(
            f"points {i} and {j} share {int(shared[i, j])} blocks (expected exactly 1)"
        )

    block_sizes = A.sum(axis=1)
    if k is None:
        k = int(block_sizes[0])
    k = int(k)
    if k < 2 or np.any(block_sizes != k):
        raise ValidationError(f"every block must contain k={k} >= 2 points")

    replication = A.sum(axis=0)
    r = (v - 1) // (k - 1)
    if (v - 1) % (k - 1) or np.any(replication != r):
        raise ValidationError(f"every point must lie in r=(v-1)/(k-1)={(v - 1) / (k - 1):g} blocks")
    if b * k * (k - 1) != v * (v - 1):
        raise ValidationError(f"block count b={b} violates b = v(v-1)/(k(k-1))")
    return SteinerIncidence(entries=A, k=k)


def gram_matrix(F):
    """Return the M x M Gram matrix F^T F."""
    X = F.matrix if isinstance(F, DesignMatrix) else np.asarray(F, dtype=float)
    return X.T @ X


def _max_offdiag_abs(X):
    """max_{i != j} |<x_i, x_j>| scanned in column blocks to bound memory."""
    M = X.shape[1]
    worst = 0.0
    for start in range(0, M, _GRAM_BLOCK):
        stop = min(start + _GRAM_BLOCK, M)
        block = np.abs(X[:, start:stop].T @ X)
        rows = np.arange(stop - start)
        block[rows, rows + start] = 0.0
        worst = max(worst, float(block.max()))
    return worst


def make_design(kind, matrix, tol=DEFAULT_TOL):
    """
    Wrap a matrix as a DesignMatrix after checking every invariant.

    Raises:
        DomainError: Unknown kind
        ValidationError: Non-unit columns or a shape that contradicts the kind
    """
    if kind not in DESIGN_KINDS:
        raise DomainError(f"unknown design kind '{kind}', expected one of {DESIGN_KINDS}")
    X = np.array(matrix, dtype=float, order="C", copy=True)
    if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
        raise ValidationError(f"design matrix must be 2-D and nonempty, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValidationError("design matrix must contain only finite entries")
    N, M = X.shape

    norms = np.linalg.norm(X, axis=0)
    worst = float(np.max(np.abs(norms - 1.0)))
    if worst > tol:
        raise ValidationError(
            f"column {int(np.argmax(np.abs(norms - 1.0)))} is not unit norm (deviation {worst:.3g})"
        )
    if kind == "etf" and M < N:
        raise ValidationError(f"etf design needs M >= N, got N={N}, M={M}")
    if kind == "simplex" and M != N + 1:
        raise ValidationError(f"simplex design needs M = N + 1, got N={N}, M={M}")
    if kind == "orthogonal" and M != N:
        raise ValidationError(f"orthogonal design needs M = N, got N={N}, M={M}")

    mu = _max_offdiag_abs(X) if M >= 2 else 0.0
    X.setflags(write=False)
    logger.debug("built %s design N=%d M=%d mu=%.6g", kind, N, M, mu)
    return DesignMatrix(kind=kind, matrix=X, coherence=mu)


# =============================================================================
# Constructions
# =============================================================================

def sylvester_hadamard(k):
    """
    Sylvester Hadamard matrix of order 2**k.

    H_1 = [[+1]], H_2n = [[H_n, H_n], [H_n, -H_n]]; the first row is all ones.

    Raises:
        CapacityError: k above MAX_SYLVESTER_POWER
    """
    k = require_int(k, "k", minimum=0)
    if k > MAX_SYLVESTER_POWER:
        raise CapacityError(
            f"Sylvester order 2**{k} exceeds the guard 2**{MAX_SYLVESTER_POWER}"
        )
    return HadamardMatrix(entries=scipy.linalg.hadamard(2 ** k, dtype=np.int8))


def steiner_pairs_incidence(v):
    """
    Incidence of the (2, 2, v)-Steiner system: one block per unordered pair.

    Blocks are in lexicographic pair order (0,1), (0,2), ..., (0,v-1), (1,2), ...

    Raises:
        DomainError: v < 2
    """
    v = require_int(v, "v", minimum=2)
    pairs = list(itertools.combinations(range(v), 2))
    A = np.zeros((len(pairs), v), dtype=np.uint8)
    rows = np.arange(len(pairs))
    idx = np.array(pairs)
    A[rows, idx[:, 0]] = 1
    A[rows, idx[:, 1]] = 1
    return SteinerIncidence(entries=A, k=2)


def steiner_etf(A, H):
    """
    Build a real ETF from a Steiner incidence and a Hadamard matrix.

    For each point j, the i-th one (top to bottom) of column j of A is
    replaced by row i+1 of H (the all-ones row 0 is skipped), spanning that
    point's r+1 output columns. Columns are point-major; every entry is
    finally scaled by 1/sqrt(r).

    Returns:
        DesignMatrix of kind 'etf' with N = b, M = v(r+1), coherence 1/r

    Raises:
        DimensionError: H.order != r + 1
    """
    r = A.r
    if H.order != r + 1:
        raise DimensionError(
            f"Hadamard order {H.order} does not match replication number r+1={r + 1}"
        )
    b, v = A.b, A.v
    width = r + 1
    signs = H.entries[1:width].astype(float)

    F = np.zeros((b, v * width))
    for j in range(v):
        blocks = np.flatnonzero(A.entries[:, j])
        F[np.ix_(blocks, np.arange(j * width, (j + 1) * width))] = signs
    F /= math.sqrt(r)

    design = make_design("etf", F)
    logger.info("steiner ETF: N=%d M=%d mu=%.6g", design.N, design.M, design.coherence)
    return design


def etf_from_incidence(A):
    """
    Pair an incidence with the Sylvester Hadamard matrix of order r+1.

    Raises:
        DimensionError: r+1 is not a power of two (import a Hadamard matrix instead)
    """
    order = A.r + 1
    if order & (order - 1):
        raise DimensionError(
            f"r+1={order} is not a power of two; supply a Hadamard matrix of that order"
        )
    return steiner_etf(A, sylvester_hadamard(order.bit_length() - 1))


def simplex_design(N):
    """
    Regular simplex of N+1 unit vectors in R^N, fixed one dimension at a time.

    Column 0 is e_1, which forces the first entry of every other column to
    -1/N. Column d then takes the entry that completes its unit norm in
    dimension d, and the inner-product constraint fixes dimension d for all
    later columns (which share every earlier entry).
    """
    N = require_int(N, "N", minimum=1)
    F = np.zeros((N, N + 1))
    target = -1.0 / N
    for d in range(N):
        F[d, d] = math.sqrt(max(0.0, 1.0 - float(F[:d, d] @ F[:d, d])))
        shared = float(F[:d, d] @ F[:d, d + 1])
        F[d, d + 1:] = (target - shared) / F[d, d]
    return make_design("simplex", F)


def orthogonal_design(N):
    """N x N identity design (coherence 0)."""
    N = require_int(N, "N", minimum=1)
    return make_design("orthogonal", np.eye(N))


# =============================================================================
# Coherence and frame checks
# =============================================================================

def coherence(F):
    """
    Worst-case coherence max_{i != j} |<f_i, f_j>|.

    Raises:
        DomainError: Fewer than two fingerprints
    """
    if F.M < 2:
        raise DomainError(f"coherence needs M >= 2 fingerprints, got M={F.M}")
    return _max_offdiag_abs(F.matrix)


def welch_bound(N, M):
    """
    Welch lower bound sqrt((M - N) / (N (M - 1))) on the coherence of M unit vectors in R^N.

    Raises:
        DomainError: M <= N (the bound is vacuous)
    """
    N = require_int(N, "N", minimum=1)
    M = require_int(M, "M")
    if M <= N:
        raise DomainError(f"Welch bound needs M > N, got N={N}, M={M}")
    return math.sqrt((M - N) / (N * (M - 1)))


@dataclass(frozen=True)
class EtfReport:
    """Outcome of verify_etf with the worst violation of each property."""

    unit_norm: bool
    equiangular: bool
    tight: bool
    norm_violation: float
    angle_violation: float
    tight_violation: float
    tol: float

    @property
    def passed(self):
        return self.unit_norm and self.equiangular and self.tight

    @property
    def worst_violation(self):
        return max(self.norm_violation, self.angle_violation, self.tight_violation)


def verify_etf(F, tol=DEFAULT_TOL):
    """
    Check the three ETF properties of a design.

    unit_norm:   every column norm within tol of 1
    equiangular: every |off-diagonal Gram entry| within tol of a common value
    tight:       F F^T within tol of (M/N) I entrywise

    Raises:
        DomainError: tol <= 0
    """
    if not tol > 0:
        raise DomainError(f"tol must be positive, got {tol}")
    X = F.matrix if isinstance(F, DesignMatrix) else np.asarray(F, dtype=float)
    N, M = X.shape

    norm_violation = float(np.max(np.abs(np.linalg.norm(X, axis=0) - 1.0)))

    angle_violation = 0.0
    if M >= 2:
        mags = np.abs(X.T @ X)[~np.eye(M, dtype=bool)]
        angle_violation = float(mags.max() - mags.min()) / 2.0

    frame = X @ X.T
    tight_violation = float(np.max(np.abs(frame - (M / N) * np.eye(N))))

    return EtfReport(
        unit_norm=norm_violation <= tol,
        equiangular=angle_violation <= tol,
        tight=tight_violation <= tol,
        norm_violation=norm_violation,
        angle_violation=angle_violation,
        tight_violation=tight_violation,
        tol=float(tol),
    )


def design_summary(F):
    """Headline numbers of a design as a plain dict."""
    summary = {
        "kind": F.kind,
        "N": F.N,
        "M": F.M,
        "coherence": F.coherence,
        "redundancy": F.M / F.N,
        "welch_bound": None,
        "welch_gap": None,
    }
    if F.M > F.N:
        wb = welch_bound(F.N, F.M)
        summary["welch_bound"] = wb
        summary["welch_gap"] = F.coherence - wb
    return summary
