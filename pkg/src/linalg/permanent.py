"""Exact matrix permanents.

``permanent_ryser`` is the production path: Ryser's inclusion-exclusion
formula, visiting column subsets in Gray-code order so each step adds or
removes a single column from the running row sums (O(2^n n) arithmetic).
``permanent_naive`` sums over all n! permutations and only exists as an
independent oracle.
"""

import math
import functools
import itertools
import numpy as np

from src.linalg.matrices import require_square, as_matrix
from src.utils.errors import DimensionError, SizeLimitError

RYSER_MAX_SIZE = 30
NAIVE_MAX_SIZE = 9


def permanent_ryser(A):
    A = require_square(A)
    return complex(permanents_ryser(A[None, :, :])[0])


def permanents_ryser(stack):
    '''Permanents of a stack of equal-size square matrices.

    Args:
        stack: [batch, n, n] complex array

    Returns:
        [batch] complex array
    '''
    stack = np.asarray(stack, dtype=np.complex128)
    if stack.ndim != 3 or stack.shape[1] != stack.shape[2]:
        raise DimensionError(f'Expected a [batch, n, n] stack, got shape {stack.shape}.')
    batch, n, _ = stack.shape
    if n > RYSER_MAX_SIZE:
        raise SizeLimitError(f'Ryser permanent limited to n <= {RYSER_MAX_SIZE}, got n = {n}.')
    if n == 0:
        return np.ones(batch, dtype=np.complex128)

    # Columns as contiguous [n, batch, n] slices for the Gray-code updates.
    columns = np.ascontiguousarray(np.transpose(stack, (2, 0, 1)))
    row_sums = np.zeros((batch, n), dtype=np.complex128)
    total = np.zeros(batch, dtype=np.complex128)
    gray = 0
    for k in range(1, 1 << n):
        # Gray code k flips the lowest set bit of k.
        j = (k & -k).bit_length() - 1
        gray ^= 1 << j
        if gray >> j & 1:
            row_sums += columns[j]
        else:
            row_sums -= columns[j]
        # Subset size parity alternates with every flip.
        if k & 1:
            total -= row_sums.prod(axis=1)
        else:
            total += row_sums.prod(axis=1)
    return total if n % 2 == 0 else -total


@functools.lru_cache(maxsize=NAIVE_MAX_SIZE + 1)
def _permutation_table(n):
    return np.array(list(itertools.permutations(range(n))), dtype=np.intp).reshape(-1, n)


def permanent_naive(A):
    A = as_matrix(A)
    n, cols = A.shape
    if n != cols:
        raise DimensionError(f'Expected a square matrix, got {n}x{cols}.')
    if n > NAIVE_MAX_SIZE:
        raise SizeLimitError(f'Naive permanent limited to n <= {NAIVE_MAX_SIZE}, got n = {n}.')
    perms = _permutation_table(n)
    return complex(A[np.arange(n), perms].prod(axis=1).sum())


def factorial_weight(occupations):
    return math.prod(math.factorial(int(k)) for k in occupations)
