import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bosonsampling.coherent import CoherentInput, coherent_p0, coherent_pinf, coherent_visibility
from bosonsampling.core import enumerate_output_configurations, random_unitary
from bosonsampling.errors import DimensionError, NumericalDomainError, SchemaError


def monte_carlo_p0(U, modes, T, samples, seed):
    """Average prod_j |E_j|^2 over uniformly random input phases; returns (mean, standard error)."""
    rng = np.random.default_rng(seed)
    a = np.asarray(U.entries if hasattr(U, "entries") else U)
    theta = rng.uniform(0, 2 * np.pi, size=(samples, len(modes)))
    fields = np.exp(1j * theta) @ a[list(modes), :]
    values = np.ones(samples)
    for j, t in enumerate(T):
        values *= np.abs(fields[:, j]) ** (2 * t)
    weight = math.prod(math.factorial(t) for t in T)
    return values.mean() / weight, values.std(ddof=1) / math.sqrt(samples) / weight


class TestExamples:
    def test_splitter_coincidence(self, splitter):
        assert coherent_p0(splitter, (0, 1), (1, 1)) == pytest.approx(0.5, abs=1e-15)
        assert coherent_pinf(splitter, (0, 1), (1, 1)) == pytest.approx(1.0, abs=1e-15)
        assert coherent_visibility(splitter, (0, 1), (1, 1)) == pytest.approx(0.5, abs=1e-15)

    def test_splitter_bunched(self, splitter):
        assert coherent_p0(splitter, (0, 1), (2, 0)) == pytest.approx(0.75, abs=1e-15)

    def test_single_field(self, haar6):
        for i in range(6):
            for j in range(6):
                T = tuple(int(k == j) for k in range(6))
                expected = abs(haar6.entries[i, j]) ** 2
                assert coherent_p0(haar6, (i,), T) == pytest.approx(expected, abs=1e-15)
                assert coherent_pinf(haar6, (i,), T) == pytest.approx(expected, abs=1e-15)
                assert coherent_visibility(haar6, (i,), T) == pytest.approx(0.0, abs=1e-12)

    def test_identity(self):
        assert coherent_pinf(np.eye(4), (0, 1), (1, 1, 0, 0)) == 1.0

    def test_unreachable(self):
        a = np.eye(3)
        with pytest.raises(NumericalDomainError):
            coherent_visibility(a, (0, 1), (0, 1, 1))


class TestMonteCarlo:
    @pytest.mark.parametrize("T", [(1, 1), (2, 0), (0, 2)])
    def test_splitter(self, splitter, T):
        mean, se = monte_carlo_p0(splitter, (0, 1), T, 1_000_000, 1)
        assert abs(coherent_p0(splitter, (0, 1), T) - mean) < 3 * se

    @pytest.mark.parametrize("seed,modes", [(1, (0, 2)), (2, (1, 3, 4)), (3, (0, 1, 5))])
    def test_random_unitary(self, seed, modes):
        U = random_unitary(6, seed)
        rng = np.random.default_rng(seed)
        for T in [enumerate_output_configurations(6, len(modes))[k]
                  for k in rng.choice(len(enumerate_output_configurations(6, len(modes))), 4, replace=False)]:
            mean, se = monte_carlo_p0(U, modes, T.occupations, 1_000_000, seed)
            assert abs(coherent_p0(U, modes, T) - mean) < 3 * se


class TestInvariants:
    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_conservation(self, haar6, n):
        modes = tuple(range(n))
        configs = enumerate_output_configurations(6, n)
        total0 = math.fsum(coherent_p0(haar6, modes, T) for T in configs)
        totalinf = math.fsum(coherent_pinf(haar6, modes, T) for T in configs)
        assert total0 == pytest.approx(totalinf, abs=1e-9)

    def test_splitter_totals(self, splitter):
        configs = enumerate_output_configurations(2, 2)
        assert math.fsum(coherent_p0(splitter, (0, 1), T) for T in configs) == pytest.approx(2.0)
        assert math.fsum(coherent_pinf(splitter, (0, 1), T) for T in configs) == pytest.approx(2.0)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10_000), st.integers(1, 3), st.data())
    def test_nonnegative_and_bounded(self, seed, n, data):
        U = random_unitary(4, seed)
        modes = tuple(data.draw(st.permutations(range(4)))[:n])
        T = data.draw(st.sampled_from(enumerate_output_configurations(4, n)))
        p0, pinf = coherent_p0(U, modes, T), coherent_pinf(U, modes, T)
        assert p0 >= 0 and pinf >= 0
        if pinf > 1e-12:
            assert coherent_visibility(U, modes, T) <= 1.0


class TestErrors:
    def test_duplicate_modes(self):
        with pytest.raises(SchemaError):
            CoherentInput((0, 0))

    def test_empty(self):
        with pytest.raises(SchemaError):
            CoherentInput(())

    def test_colliding_config(self):
        with pytest.raises(SchemaError):
            CoherentInput.from_config((2, 0))

    def test_photon_mismatch(self, splitter):
        with pytest.raises(DimensionError):
            coherent_p0(splitter, (0, 1), (1, 0))

    def test_mode_mismatch(self, splitter):
        with pytest.raises(DimensionError):
            coherent_pinf(splitter, (0, 1), (1, 1, 0))

    def test_out_of_range(self, splitter):
        with pytest.raises(DimensionError):
            coherent_p0(splitter, (0, 2), (1, 1))

    def test_size_cap(self):
        U = random_unitary(6, 0)
        with pytest.raises(NumericalDomainError):
            coherent_p0(U, tuple(range(6)), (1,) * 6)
