import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bosonsampling.errors import NumericalDomainError, SchemaError
from bosonsampling.permanent import (
    evaluate,
    permanent,
    permanent_glynn,
    permanent_naive,
    permanent_nonneg,
    permanent_ryser,
)


def gaussian(rng, n):
    return rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))


def rel_err(x, y):
    return abs(x - y) / max(abs(y), 1e-300)


class TestNaive:
    def test_all_ones(self):
        assert permanent_naive(np.ones((3, 3))) == 6

    @pytest.mark.parametrize("n", range(0, 7))
    def test_identity(self, n):
        assert permanent_naive(np.eye(n)) == 1

    def test_measured_submatrix(self):
        m = np.array([[0.325, 0.430], [0.182 + 0.248j, -0.127 - 0.386j]])
        assert abs(abs(permanent_naive(m)) ** 2 - 0.0017) < 5e-4

    def test_size_cap(self):
        with pytest.raises(NumericalDomainError):
            permanent_naive(np.ones((11, 11)))

    def test_non_square(self):
        with pytest.raises(SchemaError):
            permanent_naive(np.ones((2, 3)))


@pytest.mark.parametrize("kernel", [permanent_ryser, permanent_glynn])
class TestFastKernels:
    def test_oracle_agreement(self, kernel, rng):
        for _ in range(200):
            n = int(rng.integers(1, 9))
            a = gaussian(rng, n)
            assert rel_err(kernel(a), permanent_naive(a)) < 1e-10

    def test_upper_triangular(self, kernel, rng):
        a = np.triu(gaussian(rng, 7))
        assert rel_err(kernel(a), np.prod(np.diag(a))) < 1e-12

    def test_two_by_two(self, kernel):
        a, b, c, d = 1 + 2j, -0.5j, 3.0, 0.25 - 1j
        assert kernel(np.array([[a, b], [c, d]])) == pytest.approx(a * d + b * c, rel=1e-15)

    @pytest.mark.parametrize("n", range(1, 13))
    def test_all_ones_exact(self, kernel, n):
        assert kernel(np.ones((n, n))) == math.factorial(n)

    def test_empty(self, kernel):
        assert kernel(np.zeros((0, 0))) == 1

    def test_threads_bit_identical(self, kernel, rng):
        a = gaussian(rng, 15)
        assert kernel(a, threads=1) == kernel(a, threads=4)

    def test_compensated_path(self, kernel):
        n = 21
        assert kernel(np.eye(n)) == 1
        assert kernel(np.triu(np.full((n, n), 1.0 + 0j))) == 1


class TestProperties:
    def test_row_column_permutation(self, rng):
        a = gaussian(rng, 6)
        p, q = rng.permutation(6), rng.permutation(6)
        assert rel_err(permanent_ryser(a[p][:, q]), permanent_ryser(a)) < 1e-12

    def test_row_scaling(self, rng):
        a = gaussian(rng, 5)
        b = a.copy()
        b[2] *= 2.5 - 1j
        assert rel_err(permanent_ryser(b), (2.5 - 1j) * permanent_ryser(a)) < 1e-12

    def test_conjugation(self, rng):
        a = gaussian(rng, 6)
        assert rel_err(permanent_ryser(a.conj()), permanent_ryser(a).conjugate()) < 1e-12


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 7), st.integers(0, 2**32 - 1))
def test_ryser_matches_naive_property(n, seed):
    a = gaussian(np.random.default_rng(seed), n)
    assert rel_err(permanent_ryser(a), permanent_naive(a)) < 1e-10
    assert rel_err(permanent_glynn(a), permanent_naive(a)) < 1e-10


class TestNonNegative:
    def test_half_matrix(self):
        assert permanent_nonneg(np.full((2, 2), 0.5)) == pytest.approx(0.5, abs=1e-15)

    def test_zero(self):
        assert permanent_nonneg(np.zeros((4, 4))) == 0.0

    def test_measured_submatrix(self):
        m = np.array([[0.325, 0.430], [0.182 + 0.248j, -0.127 - 0.386j]])
        assert abs(permanent_nonneg(np.abs(m) ** 2) - 0.0349) < 5e-4

    def test_negative_rejected(self):
        with pytest.raises(SchemaError):
            permanent_nonneg(np.array([[1.0, -0.1], [0.0, 1.0]]))

    @pytest.mark.parametrize("algorithm", ["naive", "ryser", "glynn"])
    def test_algorithms_agree(self, rng, algorithm):
        a = rng.random((7, 7))
        assert permanent_nonneg(a, algorithm) == pytest.approx(permanent_naive(a).real, rel=1e-12)

    def test_never_negative(self, rng):
        for _ in range(50):
            a = rng.random((6, 6)) * (rng.random((6, 6)) < 0.3)
            assert permanent_nonneg(a) >= 0.0


def test_dispatch_and_evaluate(rng):
    a = gaussian(rng, 5)
    assert permanent(a, "glynn") == pytest.approx(permanent(a, "naive"), rel=1e-12)
    result = evaluate(a, "ryser")
    assert result.n == 5 and result.algorithm == "ryser" and result.seconds >= 0
    with pytest.raises(SchemaError):
        permanent(a, "gurvits")
