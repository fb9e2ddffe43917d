import math
import numpy as np
import pytest
from hypothesis import given, strategies as st

from src.linalg.permanent import (
    factorial_weight, permanent_naive, permanent_ryser, permanents_ryser,
)
from src.utils.errors import DimensionError, SizeLimitError
from src.utils.utils import derive_rng


def random_complex(rng, n, size=None):
    shape = (n, n) if size is None else (size, n, n)
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


@pytest.mark.parametrize('n', range(1, 7))
def test_ryser_identity(n):
    assert permanent_ryser(np.eye(n)) == 1


@pytest.mark.parametrize('n', range(1, 10))
def test_ryser_all_ones_is_factorial(n):
    assert permanent_ryser(np.ones((n, n))) == math.factorial(n)


def test_naive_two_by_two():
    assert permanent_naive([[1, 2], [3, 4]]) == 10


def test_naive_scalar():
    assert permanent_naive([[2 - 3j]]) == 2 - 3j


def test_naive_three_by_three_ones():
    assert permanent_naive(np.ones((3, 3))) == 6


def test_ryser_matches_naive_on_random_6x6():
    A = random_complex(derive_rng(6), 6)
    exact = permanent_naive(A)
    assert abs(permanent_ryser(A) - exact) / max(1.0, abs(exact)) <= 1e-10


@pytest.mark.parametrize('n', range(2, 8))
def test_ryser_matches_naive_oracle(n):
    stack = random_complex(derive_rng(n, 17), n, size=500)
    fast = permanents_ryser(stack)
    for A, value in zip(stack, fast):
        exact = permanent_naive(A)
        assert abs(value - exact) / max(1.0, abs(exact)) <= 1e-10


@given(n=st.integers(1, 6), seed=st.integers(0, 10**6))
def test_permanent_invariant_under_row_and_column_permutations(n, seed):
    rng = derive_rng(seed)
    A = random_complex(rng, n)
    shuffled = A[rng.permutation(n)][:, rng.permutation(n)]
    value = permanent_ryser(A)
    assert abs(permanent_ryser(shuffled) - value) <= 1e-10 * max(1.0, abs(value))


@given(n=st.integers(1, 6), seed=st.integers(0, 10**6), row=st.integers(0, 5))
def test_permanent_is_linear_in_each_row(n, seed, row):
    rng = derive_rng(seed)
    A = random_complex(rng, n)
    c = complex(*rng.standard_normal(2))
    scaled = A.copy()
    scaled[row % n] *= c
    value = permanent_ryser(A)
    assert abs(permanent_ryser(scaled) - c * value) <= 1e-10 * max(1.0, abs(c * value))


def test_batched_matches_single():
    stack = random_complex(derive_rng(3), 4, size=10)
    batched = permanents_ryser(stack)
    for A, value in zip(stack, batched):
        assert abs(value - permanent_ryser(A)) <= 1e-12 * max(1.0, abs(value))


def test_empty_matrix_permanent_is_one():
    np.testing.assert_array_equal(permanents_ryser(np.zeros((3, 0, 0))), np.ones(3))


def test_ryser_rejects_non_square():
    with pytest.raises(DimensionError):
        permanent_ryser(np.ones((2, 3)))


def test_naive_rejects_non_square():
    with pytest.raises(DimensionError):
        permanent_naive(np.ones((3, 2)))


def test_ryser_size_guard():
    with pytest.raises(SizeLimitError):
        permanent_ryser(np.eye(31))


def test_naive_size_guard():
    with pytest.raises(SizeLimitError):
        permanent_naive(np.eye(10))


def test_factorial_weight():
    assert factorial_weight((2, 0, 3, 1)) == 12
    assert factorial_weight((0, 0)) == 1
