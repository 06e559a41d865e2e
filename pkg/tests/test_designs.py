"""
Fingerprint Design Tests

Steiner/Hadamard ETF construction (including the 6 x 16 golden matrix),
simplex and orthogonal designs, coherence, the Welch bound and ETF
verification.

Run with: python -m pytest tests/test_designs.py -v
"""

import sys
import os
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import itertools
import math

import pytest
import numpy as np

from etf_fingerprinting.core.designs import (
    check_hadamard,
    check_steiner,
    coherence,
    design_summary,
    etf_from_incidence,
    gram_matrix,
    make_design,
    orthogonal_design,
    simplex_design,
    steiner_etf,
    steiner_pairs_incidence,
    sylvester_hadamard,
    verify_etf,
    welch_bound,
)
from etf_fingerprinting.core.errors import (
    CapacityError,
    DimensionError,
    DomainError,
    ValidationError,
)

P = [1, -1, 1, -1]     # Hadamard row 1
Q = [1, 1, -1, -1]     # Hadamard row 2
R = [1, -1, -1, 1]     # Hadamard row 3
Z = [0, 0, 0, 0]

# 6 x 16 Steiner ETF from the (2,2,4) system before the 1/sqrt(3) scaling
GOLDEN_ETF_SIGNS = np.array([
    P + P + Z + Z,
    Q + Z + P + Z,
    R + Z + Z + P,
    Z + Q + Q + Z,
    Z + R + Z + Q,
    Z + Z + R + R,
])

GOLDEN_INCIDENCE = np.array([
    [1, 1, 0, 0],
    [1, 0, 1, 0],
    [1, 0, 0, 1],
    [0, 1, 1, 0],
    [0, 1, 0, 1],
    [0, 0, 1, 1],
])


@pytest.fixture
def golden_etf():
    return steiner_etf(steiner_pairs_incidence(4), sylvester_hadamard(2))


# =============================================================================
# Hadamard matrices
# =============================================================================

class TestSylvesterHadamard:
    """Sylvester doubling construction."""

    def test_order_one(self):
        assert sylvester_hadamard(0).entries.tolist() == [[1]]

    def test_order_two(self):
        assert sylvester_hadamard(1).entries.tolist() == [[1, 1], [1, -1]]

    def test_order_four_rows(self):
        """Rows (+ + + +), (+ - + -), (+ + - -), (+ - - +)."""
        H = sylvester_hadamard(2).entries
        assert H.tolist() == [[1, 1, 1, 1], P, Q, R]

    @pytest.mark.parametrize("k", range(11))
    def test_rows_orthogonal(self, k):
        H = sylvester_hadamard(k).entries.astype(np.int64)
        n = 2 ** k
        assert np.array_equal(H @ H.T, n * np.eye(n, dtype=np.int64))
        assert np.all(H[0] == 1)

    def test_doubling_rule(self):
        H2 = sylvester_hadamard(2).entries
        H3 = sylvester_hadamard(3).entries
        assert np.array_equal(H3, np.block([[H2, H2], [H2, -H2]]))

    def test_size_guard(self):
        with pytest.raises(CapacityError):
            sylvester_hadamard(21)

    def test_negative_rejected(self):
        with pytest.raises(DomainError):
            sylvester_hadamard(-1)

    def test_check_hadamard_names_rows(self):
        bad = np.array([[1, 1], [1, 1]])
        with pytest.raises(ValidationError, match="rows 0 and 1"):
            check_hadamard(bad)


# =============================================================================
# Steiner incidence
# =============================================================================

class TestSteinerPairsIncidence:

    def test_v2_single_block(self):
        A = steiner_pairs_incidence(2)
        assert A.entries.tolist() == [[1, 1]]
        assert A.r == 1

    def test_v4_matches_golden(self):
        A = steiner_pairs_incidence(4)
        assert np.array_equal(A.entries, GOLDEN_INCIDENCE)
        assert (A.b, A.v, A.k, A.r) == (6, 4, 2, 3)

    def test_v5_exhaustive_pair_property(self):
        A = steiner_pairs_incidence(5).entries
        assert A.shape == (10, 5)
        assert np.all(A.sum(axis=0) == 4)
        for i, j in itertools.combinations(range(5), 2):
            assert int(np.sum(A[:, i] & A[:, j])) == 1

    @pytest.mark.parametrize("v", range(2, 41))
    def test_invariants_hold(self, v):
        A = steiner_pairs_incidence(v)
        # re-validation raises on any violation
        checked = check_steiner(A.entries, k=2)
        assert checked.b == v * (v - 1) // 2
        assert checked.r == v - 1

    def test_v_below_two_rejected(self):
        with pytest.raises(DomainError):
            steiner_pairs_incidence(1)

    def test_duplicated_pair_names_points(self):
        rows = np.vstack([GOLDEN_INCIDENCE, GOLDEN_INCIDENCE[:1]])
        with pytest.raises(ValidationError, match="points 0 and 1"):
            check_steiner(rows)


# =============================================================================
# Steiner ETF
# =============================================================================

class TestSteinerEtf:

    def test_golden_matrix_exact(self, golden_etf):
        expected = GOLDEN_ETF_SIGNS / math.sqrt(3)
        assert golden_etf.matrix.shape == (6, 16)
        assert np.array_equal(np.sign(golden_etf.matrix), GOLDEN_ETF_SIGNS)
        assert np.max(np.abs(golden_etf.matrix - expected)) <= 1e-15

    def test_golden_coherence_is_welch(self, golden_etf):
        assert golden_etf.kind == "etf"
        assert np.isclose(golden_etf.coherence, 1 / 3, atol=1e-12)
        assert np.isclose(golden_etf.coherence, welch_bound(6, 16), atol=1e-12)

    def test_v16_all_angles_equal(self):
        F = steiner_etf(steiner_pairs_incidence(16), sylvester_hadamard(4))
        assert (F.N, F.M) == (120, 256)
        G = gram_matrix(F)
        off = np.abs(G[~np.eye(256, dtype=bool)])
        assert np.allclose(off, 1 / 15, atol=1e-12)

    @pytest.mark.parametrize("v", [4, 8, 16, 32])
    def test_validity_sweep(self, v):
        F = etf_from_incidence(steiner_pairs_incidence(v))
        report = verify_etf(F, tol=1e-10)
        assert report.passed, f"v={v}: worst violation {report.worst_violation}"
        assert abs(F.coherence - welch_bound(F.N, F.M)) <= 1e-12

    def test_frame_diagonal_is_redundancy(self, golden_etf):
        X = golden_etf.matrix
        assert np.allclose(np.diag(X @ X.T), 16 / 6, atol=1e-10)

    def test_order_mismatch(self):
        with pytest.raises(DimensionError):
            steiner_etf(steiner_pairs_incidence(4), sylvester_hadamard(3))

    def test_non_power_of_two_needs_import(self):
        # v=6 gives r+1 = 6
        with pytest.raises(DimensionError, match="power of two"):
            etf_from_incidence(steiner_pairs_incidence(6))

    def test_matrix_is_read_only(self, golden_etf):
        with pytest.raises(ValueError):
            golden_etf.matrix[0, 0] = 0.0


# =============================================================================
# Simplex and orthogonal designs
# =============================================================================

class TestSimplexDesign:

    def test_n1_antipodal(self):
        F = simplex_design(1)
        assert np.allclose(F.matrix, [[1.0, -1.0]])
        assert np.isclose(F.coherence, 1.0)

    def test_n2_planar(self):
        G = gram_matrix(simplex_design(2))
        assert np.allclose(G, [[1, -0.5, -0.5], [-0.5, 1, -0.5], [-0.5, -0.5, 1]], atol=1e-12)

    def test_first_column_is_basis_vector(self):
        F = simplex_design(5)
        assert np.allclose(F.column(0), np.eye(5)[:, 0])

    @pytest.mark.parametrize("N", [1, 2, 3, 4, 6, 10, 50, 121])
    def test_gram_structure(self, N):
        F = simplex_design(N)
        expected = (1 + 1 / N) * np.eye(N + 1) - np.ones((N + 1, N + 1)) / N
        assert np.max(np.abs(gram_matrix(F) - expected)) <= 1e-12
        assert np.isclose(F.coherence, 1 / N, atol=1e-12)

    def test_columns_sum_to_zero(self):
        assert np.allclose(simplex_design(7).matrix.sum(axis=1), 0.0, atol=1e-12)

    def test_zero_dimension_rejected(self):
        with pytest.raises(DomainError):
            simplex_design(0)


class TestOrthogonalDesign:

    def test_identity(self):
        F = orthogonal_design(3)
        assert np.array_equal(F.matrix, np.eye(3))
        assert F.coherence == 0.0
        assert F.kind == "orthogonal"

    def test_single_user(self):
        assert orthogonal_design(1).matrix.tolist() == [[1.0]]

    def test_fig3_baseline_size(self):
        F = orthogonal_design(195)
        assert (F.N, F.M) == (195, 195)


# =============================================================================
# Coherence, Welch bound, verification
# =============================================================================

class TestCoherence:

    def test_orthogonal_zero(self):
        assert coherence(orthogonal_design(2)) == 0.0

    def test_golden(self, golden_etf):
        assert np.isclose(coherence(golden_etf), 1 / 3, atol=1e-12)

    def test_simplex(self):
        assert np.isclose(coherence(simplex_design(6)), 1 / 6, atol=1e-12)

    def test_single_user_rejected(self):
        with pytest.raises(DomainError):
            coherence(orthogonal_design(1))

    def test_cached_matches_recomputed(self):
        F = etf_from_incidence(steiner_pairs_incidence(8))
        assert abs(F.coherence - coherence(F)) <= 1e-12


class TestWelchBound:

    @pytest.mark.parametrize("N, M, expected", [
        (6, 16, 1 / 3),
        (6, 7, 1 / 6),
        (120, 256, 1 / 15),
    ])
    def test_values(self, N, M, expected):
        assert np.isclose(welch_bound(N, M), expected, atol=1e-14)

    def test_vacuous_rejected(self):
        with pytest.raises(DomainError):
            welch_bound(6, 6)


class TestVerifyEtf:

    def test_golden_passes(self, golden_etf):
        assert verify_etf(golden_etf, tol=1e-10).passed

    def test_orthogonal_passes(self):
        assert verify_etf(orthogonal_design(4), tol=1e-10).passed

    def test_perturbation_detected(self, golden_etf):
        X = golden_etf.matrix.copy()
        X[0, 0] += 1e-3
        report = verify_etf(X, tol=1e-10)
        assert not report.passed
        assert 1e-4 < report.worst_violation < 1e-2

    def test_non_tight_frame(self):
        # three unit vectors, two of them equal: not tight
        X = np.array([[1.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
        report = verify_etf(X)
        assert report.unit_norm
        assert not report.tight

    def test_tol_must_be_positive(self, golden_etf):
        with pytest.raises(DomainError):
            verify_etf(golden_etf, tol=0.0)


class TestMakeDesign:

    def test_rejects_non_unit_columns(self):
        with pytest.raises(ValidationError, match="unit norm"):
            make_design("imported", np.array([[1.0, 2.0], [0.0, 0.0]]))

    def test_shape_must_match_kind(self):
        with pytest.raises(ValidationError):
            make_design("simplex", np.eye(3))

    def test_does_not_freeze_caller_array(self):
        X = np.eye(3)
        make_design("orthogonal", X)
        X[0, 0] = 1.0  # still writable

    def test_summary(self, golden_etf):
        summary = design_summary(golden_etf)
        assert summary["N"] == 6 and summary["M"] == 16
        assert np.isclose(summary["redundancy"], 16 / 6)
        assert abs(summary["welch_gap"]) <= 1e-12
