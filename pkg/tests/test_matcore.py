import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from opconvex.errors import DimensionMismatch, DomainViolation, NotHermitian
from opconvex.matcore import (
    PdSamplerSpec,
    congruence_half,
    haar_unitary,
    hermitian,
    loewner_margin,
    matrix_from_json,
    matrix_function,
    matrix_to_json,
    random_hermitian,
    random_pd,
    spectral_decompose,
)
from opconvex.frechet import PowerFunction

seeds = st.integers(min_value=0, max_value=2**63 - 1)
dims = st.integers(min_value=1, max_value=6)


def test_hermitian_symmetrizes_small_asymmetry():
    A = np.array([[1.0, 2.0 + 1e-13], [2.0, 3.0]])
    H = hermitian(A)
    assert np.array_equal(H, H.conj().T)
    assert H.dtype == np.complex128


def test_hermitian_rejects_large_asymmetry():
    with pytest.raises(NotHermitian):
        hermitian([[1.0, 2.0], [0.0, 1.0]])
    with pytest.raises(DimensionMismatch):
        hermitian(np.ones((2, 3)))


class TestSpectralDecompose:
    def test_diagonal(self):
        w, U = spectral_decompose(np.diag([1.0, 2.0]))
        assert np.allclose(w, [1, 2])
        assert np.allclose(np.abs(U), np.eye(2))

    def test_two_by_two(self):
        w, _ = spectral_decompose([[2.0, 1.0], [1.0, 2.0]])
        assert np.allclose(w, [1.0, 3.0], atol=1e-14)

    def test_identity(self):
        w, _ = spectral_decompose(np.eye(5))
        assert np.allclose(w, 1.0)

    @given(seeds, dims)
    @settings(max_examples=30, deadline=None)
    def test_invariants(self, seed, n):
        A = random_pd(PdSamplerSpec(n, -2, 2, seed))
        w, U = spectral_decompose(A)
        assert np.all(np.diff(w) >= 0)
        assert np.linalg.norm(U.conj().T @ U - np.eye(n)) <= 1e-12 * n
        assert np.linalg.norm((U * w) @ U.conj().T - A) <= 1e-11 * (1 + np.linalg.norm(A))


class TestMatrixFunction:
    def test_sqrt_diagonal(self):
        assert np.allclose(matrix_function(np.sqrt, np.diag([4.0, 9.0])), np.diag([2.0, 3.0]))

    def test_square_matches_product(self):
        A = np.array([[2.0, 1.0], [1.0, 2.0]])
        assert np.allclose(matrix_function(lambda t: t**2, A), [[5, 4], [4, 5]], atol=1e-13)

    def test_inverse_identity(self):
        assert np.allclose(matrix_function(lambda t: 1 / t, np.eye(3)), np.eye(3))

    def test_domain_violation(self):
        with pytest.raises(DomainViolation):
            matrix_function(PowerFunction(0.5), np.diag([1.0, -1.0]))
        with pytest.raises(DomainViolation):
            matrix_function(np.sqrt, np.diag([1.0, -1.0]))

    @given(seeds, dims)
    @settings(max_examples=30, deadline=None)
    def test_unitary_covariance(self, seed, n):
        rng = np.random.default_rng(seed)
        A = random_pd(PdSamplerSpec(n, -1, 1, seed))
        Q = haar_unitary(rng, n)
        f = PowerFunction(1.5)
        lhs = matrix_function(f, Q @ A @ Q.conj().T)
        fA = matrix_function(f, A)
        rhs = Q @ fA @ Q.conj().T
        assert np.linalg.norm(lhs - rhs) <= 1e-10 * (1 + np.linalg.norm(fA))


class TestLoewnerMargin:
    def test_examples(self):
        assert loewner_margin(np.eye(3), 2 * np.eye(3)) == pytest.approx(1.0)
        A = random_pd(PdSamplerSpec(3, seed=1))
        assert loewner_margin(A, A) == 0.0
        assert loewner_margin(np.diag([0.0, 2.0]), np.diag([1.0, 1.0])) == pytest.approx(-1.0)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            loewner_margin(np.eye(2), np.eye(3))

    @given(seeds, dims)
    @settings(max_examples=30, deadline=None)
    def test_order_reversal_under_negation(self, seed, n):
        # A <= B iff -B <= -A, with the same margin
        rng = np.random.default_rng(seed)
        A, B = random_hermitian(rng, n), random_hermitian(rng, n)
        assert loewner_margin(A, B) == pytest.approx(loewner_margin(-B, -A), abs=1e-12)
        assert loewner_margin(A, B) == pytest.approx(-np.linalg.eigvalsh(A - B)[-1], abs=1e-12)


class TestRandomPd:
    def test_unit_interval_dim_one(self):
        assert np.array_equal(random_pd(PdSamplerSpec(1, 0.0, 0.0, 123)), np.array([[1.0 + 0j]]))

    def test_deterministic(self):
        spec = PdSamplerSpec(5, -2, 2, 99)
        assert np.array_equal(random_pd(spec), random_pd(spec))

    def test_eigenvalue_range(self):
        w, _ = spectral_decompose(random_pd(PdSamplerSpec(4, -2, 2, 7)))
        assert np.all(w >= 0.01 * (1 - 1e-12)) and np.all(w <= 100 * (1 + 1e-12))

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            PdSamplerSpec(0)
        with pytest.raises(ValueError):
            PdSamplerSpec(2, 1.0, 0.0)
        with pytest.raises(ValueError):
            PdSamplerSpec(2, seed=2**64)

    def test_haar_unitary_is_unitary(self, rng):
        Q = haar_unitary(rng, 6)
        assert np.allclose(Q.conj().T @ Q, np.eye(6), atol=1e-13)


class TestCongruence:
    def test_identity_base(self, rng):
        X = random_hermitian(rng, 3)
        assert np.allclose(congruence_half(np.eye(3), X, 0.5), X)

    def test_scalar_base(self, rng):
        X = random_hermitian(rng, 3)
        assert np.allclose(congruence_half(4 * np.eye(3), X, 0.5), 4 * X)

    def test_one_by_one(self):
        assert congruence_half(4.0, 3.0, -0.5)[0, 0].real == pytest.approx(0.75)

    def test_rejects_indefinite_base(self):
        with pytest.raises(DomainViolation):
            congruence_half(np.diag([1.0, 0.0]), np.eye(2), 0.5)

    @given(seeds, dims)
    @settings(max_examples=30, deadline=None)
    def test_round_trip(self, seed, n):
        rng = np.random.default_rng(seed)
        B = random_pd(PdSamplerSpec(n, -1, 1, seed))
        X = random_hermitian(rng, n)
        back = congruence_half(B, congruence_half(B, X, -0.5), 0.5)
        assert np.linalg.norm(back - X) <= 1e-10 * (1 + np.linalg.norm(X))


def test_matrix_json_round_trip(rng):
    A = random_hermitian(rng, 3)
    obj = json.loads(json.dumps(matrix_to_json(A)))
    assert obj["dim"] == 3
    assert np.array_equal(matrix_from_json(obj), A)


def test_matrix_json_accepts_real_entries():
    assert np.array_equal(matrix_from_json({"dim": 2, "entries": [[1, 2], [2, 1]]}), [[1, 2], [2, 1]])
    with pytest.raises(DimensionMismatch):
        matrix_from_json({"dim": 2, "entries": [[1, 2]]})
