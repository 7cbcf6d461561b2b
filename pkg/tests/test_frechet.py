import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import fractional_matrix_power

from opconvex.errors import DimensionMismatch, DomainViolation, SingularDifferential
from opconvex.frechet import (
    PowerFunction,
    divided_difference,
    frechet_apply,
    frechet_inverse_apply,
    frechet_trace_form,
    frechet_trace_forms,
    loewner_matrix,
)
from opconvex.funcalc import trace_form
from opconvex.kernels import ScalarKernel
from opconvex.matcore import PdSamplerSpec, haar_unitary, matrix_function, random_complex, random_hermitian, random_pd

seeds = st.integers(min_value=0, max_value=2**63 - 1)
positive = st.floats(min_value=1e-2, max_value=1e2, allow_nan=False)
exponents = st.sampled_from([-0.75, -0.25, 0.25, 0.5, 1.25, 1.5, 1.75, 2.0, 3.0])


def dd_oracle(a, s, t):
    """Divided difference of t^a at 50 digits."""
    with mpmath.workdps(50):
        s, t = mpmath.mpf(s), mpmath.mpf(t)
        if s == t:
            return float(a * s ** (a - 1))
        return float((t**a - s**a) / (t - s))


def block_frechet(a, A, H):
    """Upper-right block of f([[A, H], [0, A]]) for f = t^a (Schur-Pade, no eigendecomposition)."""
    n = A.shape[0]
    Z = np.zeros((2 * n, 2 * n), dtype=complex)
    Z[:n, :n] = A
    Z[n:, n:] = A
    Z[:n, n:] = H
    return fractional_matrix_power(Z, a)[:n, n:]


class TestDividedDifference:
    def test_square(self):
        assert divided_difference(PowerFunction(2), 1.0, 3.0) == pytest.approx(4.0, rel=1e-15)

    def test_diagonal_is_derivative(self):
        assert divided_difference(PowerFunction(1.5), 1.0, 1.0) == 1.5

    def test_three_halves_closed_form(self):
        assert divided_difference(PowerFunction(1.5), 1.0, 4.0) == pytest.approx(7 / 3, rel=1e-15)

    def test_domain(self):
        with pytest.raises(DomainViolation):
            divided_difference(PowerFunction(2), 0.0, 1.0)
        with pytest.raises(DomainViolation):
            divided_difference(PowerFunction(2), -1.0, 1.0)

    @given(exponents, positive, positive)
    @settings(max_examples=200, deadline=None)
    def test_against_high_precision(self, a, s, t):
        got = divided_difference(PowerFunction(a), s, t)
        assert got == pytest.approx(dd_oracle(a, s, t), rel=1e-12)

    @given(exponents, positive, st.floats(min_value=-12, max_value=-3))
    @settings(max_examples=200, deadline=None)
    def test_near_diagonal_accuracy(self, a, s, log_gap):
        t = s * (1 + 10.0**log_gap)
        assert divided_difference(PowerFunction(a), s, t) == pytest.approx(dd_oracle(a, s, t), rel=1e-9)

    @pytest.mark.parametrize("a", [0.5, 1.5, 2.0, -0.5])
    @pytest.mark.parametrize("s", [0.3, 1.0, 7.0])
    def test_continuous_across_switch(self, a, s):
        f = PowerFunction(a)
        gap = 1e-7 * max(s, 1.0)
        inside = divided_difference(f, s, s + gap * (1 - 1e-6))
        outside = divided_difference(f, s, s + gap * (1 + 1e-6))
        assert inside == pytest.approx(outside, rel=1e-8)

    def test_generic_callable(self):
        class Cube:
            def __call__(self, t):
                return t**3

            def derivative(self, t):
                return 3 * t**2

        assert divided_difference(Cube(), 1.0, 2.0) == pytest.approx(7.0)
        assert divided_difference(Cube(), 2.0, 2.0) == pytest.approx(12.0)

    def test_symmetric(self):
        f = PowerFunction(1.3)
        assert divided_difference(f, 0.7, 5.1) == divided_difference(f, 5.1, 0.7)


class TestLoewnerMatrix:
    def test_square(self):
        assert np.allclose(loewner_matrix(PowerFunction(2), [1.0, 3.0]), [[2, 4], [4, 6]], rtol=1e-15)

    def test_identity_function(self):
        assert np.allclose(loewner_matrix(PowerFunction(1), [0.5, 2.0, 9.0]), 1.0, rtol=1e-15)

    def test_single(self):
        assert loewner_matrix(PowerFunction(0.5), [4.0]).shape == (1, 1)
        assert loewner_matrix(PowerFunction(0.5), [4.0])[0, 0] == 0.25

    def test_symmetric_with_derivative_diagonal(self, rng):
        lam = 10 ** rng.uniform(-2, 2, 6)
        f = PowerFunction(1.7)
        L = loewner_matrix(f, lam)
        assert np.array_equal(L, L.T)
        assert np.allclose(np.diag(L), f.derivative(lam), rtol=1e-15)


class TestFrechetApply:
    def test_square_identity(self, rng):
        A = random_pd(PdSamplerSpec(4, seed=1))
        H = random_complex(rng, 4)
        assert np.allclose(frechet_apply(PowerFunction(2), A, H), A @ H + H @ A, rtol=1e-12, atol=1e-12)

    def test_identity_function(self, rng):
        A = random_pd(PdSamplerSpec(3, seed=2))
        H = random_complex(rng, 3)
        assert np.allclose(frechet_apply(PowerFunction(1), A, H), H, rtol=1e-13)

    def test_diagonal_example(self):
        out = frechet_apply(PowerFunction(2), np.diag([1.0, 2.0]), [[0.0, 1.0], [1.0, 0.0]])
        assert np.allclose(out, [[0, 3], [3, 0]])

    def test_errors(self):
        with pytest.raises(DomainViolation):
            frechet_apply(PowerFunction(2), np.diag([1.0, -1.0]), np.eye(2))
        with pytest.raises(DimensionMismatch):
            frechet_apply(PowerFunction(2), np.eye(2), np.eye(3))

    @pytest.mark.parametrize("a", [1.5, 0.5, 2.0, 1.25, 0.75])
    @pytest.mark.parametrize("n", [2, 3, 5])
    def test_against_block_triangular_oracle(self, a, n, rng):
        A = random_pd(PdSamplerSpec(n, -1, 1, int(rng.integers(2**63))))
        H = random_complex(rng, n)
        want = block_frechet(a, A, H)
        got = frechet_apply(PowerFunction(a), A, H)
        assert np.linalg.norm(got - want) <= 1e-9 * (1 + np.linalg.norm(want))

    @given(seeds, st.sampled_from([1.5, 0.5, 2.0]))
    @settings(max_examples=40, deadline=None)
    def test_finite_difference(self, seed, a):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(1, 6))
        A = random_pd(PdSamplerSpec(n, -1, 1, seed))
        H = random_hermitian(rng, n)
        f, eps = PowerFunction(a), 1e-5
        fd = (matrix_function(f, A + eps * H) - matrix_function(f, A - eps * H)) / (2 * eps)
        D = frechet_apply(f, A, H)
        assert np.linalg.norm(fd - D) <= 1e-5 * (1 + np.linalg.norm(D))

    @given(seeds)
    @settings(max_examples=40, deadline=None)
    def test_hermitian_preserving_and_covariant(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(1, 6))
        A = random_pd(PdSamplerSpec(n, seed=seed))
        H = random_hermitian(rng, n)
        Q = haar_unitary(rng, n)
        f = PowerFunction(1.5)
        D = frechet_apply(f, A, H)
        assert np.linalg.norm(D - D.conj().T) <= 1e-12 * (1 + np.linalg.norm(D))
        lhs = frechet_apply(f, Q @ A @ Q.conj().T, Q @ H @ Q.conj().T)
        assert np.linalg.norm(lhs - Q @ D @ Q.conj().T) <= 1e-10 * (1 + np.linalg.norm(D))


class TestFrechetInverse:
    def test_square_diagonal(self):
        out = frechet_inverse_apply(PowerFunction(2), np.diag([1.0, 2.0]), [[0.0, 1.0], [1.0, 0.0]])
        assert np.allclose(out, [[0, 1 / 3], [1 / 3, 0]])

    def test_identity_function(self, rng):
        A = random_pd(PdSamplerSpec(3, seed=4))
        H = random_complex(rng, 3)
        assert np.allclose(frechet_inverse_apply(PowerFunction(1), A, H), H, rtol=1e-13)

    @given(seeds, st.sampled_from([1.25, 1.5, 2.0, 0.5]))
    @settings(max_examples=40, deadline=None)
    def test_round_trip(self, seed, a):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(1, 6))
        A = random_pd(PdSamplerSpec(n, seed=seed))
        H = random_complex(rng, n)
        f = PowerFunction(a)
        back = frechet_apply(f, A, frechet_inverse_apply(f, A, H))
        assert np.linalg.norm(back - H) <= 1e-9 * (1 + np.linalg.norm(H))

    def test_singular(self):
        # t^0 has a vanishing differential
        with pytest.raises(SingularDifferential):
            frechet_inverse_apply(PowerFunction(0), np.diag([1.0, 2.0]), np.eye(2))


class TestTraceForm:
    def test_square_identity(self):
        assert frechet_trace_form(PowerFunction(2), np.eye(3), np.eye(3)) == pytest.approx(6.0)

    def test_zero(self):
        assert frechet_trace_form(PowerFunction(2), np.eye(3), np.zeros((3, 3))) == 0.0

    def test_three_halves_example(self):
        value = frechet_trace_form(PowerFunction(1.5), np.diag([1.0, 4.0]), [[0.0, 1.0], [1.0, 0.0]])
        assert value == pytest.approx(14 / 3, rel=1e-14)

    def test_batched_matches_single(self, rng):
        A = random_pd(PdSamplerSpec(4, seed=3))
        probes = [random_hermitian(rng, 4) for _ in range(5)]
        f = PowerFunction(1.5)
        assert np.allclose(frechet_trace_forms(f, A, probes), [frechet_trace_form(f, A, H) for H in probes])

    def test_inverse_trace_form(self, rng):
        A = random_pd(PdSamplerSpec(3, seed=3))
        H = random_hermitian(rng, 3)
        f = PowerFunction(1.5)
        direct = np.vdot(H, frechet_inverse_apply(f, A, H)).real
        assert frechet_trace_forms(f, A, [H], inverse=True)[0] == pytest.approx(direct, rel=1e-12)

    @given(seeds, st.sampled_from([0.25, 0.5, 0.75, 1.0]))
    @settings(max_examples=50, deadline=None)
    def test_equals_kernel_trace_form(self, seed, p):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(1, 6))
        A = random_pd(PdSamplerSpec(n, seed=seed))
        H = random_complex(rng, n)
        a = frechet_trace_form(PowerFunction(1 + p), A, H)
        b = trace_form(ScalarKernel("G21", p), A, A, H)
        assert abs(a - b) <= 1e-10 * (1 + abs(b))
