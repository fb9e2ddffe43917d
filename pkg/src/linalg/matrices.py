"""Dense complex matrices: validation, Haar sampling, scattering submatrices.

Matrices are plain ``numpy`` complex128 arrays, row-major and never mutated
after construction. The JSON exchange format is
``{"rows": m, "cols": m, "re": [...], "im": [...]}`` with row-major entries.
"""

import hashlib
import logging
import numpy as np
from scipy.linalg import qr, polar

from src.utils.errors import DimensionError, DomainError, ConfigurationError
from src.utils.utils import load_json, save_json, derive_rng, STREAM_HAAR

logger = logging.getLogger(__name__)

UNITARY_TOL = 1e-10
# Printed fixtures (five-decimal entries) only reach this level.
FIXTURE_UNITARY_TOL = 1e-3


def as_matrix(entries):
    '''Validates ``entries`` as a finite 2-D complex matrix and returns a read-only copy.'''
    matrix = np.array(entries, dtype=np.complex128)
    if matrix.ndim != 2 or 0 in matrix.shape:
        raise DimensionError(f'Expected a non-empty 2-D matrix, got shape {matrix.shape}.')
    if not np.all(np.isfinite(matrix)):
        raise DomainError('Matrix entries must be finite (no NaN/Inf).')
    matrix.setflags(write=False)
    return matrix


def require_square(matrix):
    matrix = as_matrix(matrix)
    rows, cols = matrix.shape
    if rows != cols:
        raise DimensionError(f'Expected a square matrix, got {rows}x{cols}.')
    return matrix


def unitarity_residual(U):
    U = require_square(U)
    identity = np.eye(U.shape[0])
    return max(np.max(np.abs(U @ U.conj().T - identity)),
               np.max(np.abs(U.conj().T @ U - identity)))


def is_unitary(U, tol=UNITARY_TOL):
    U = require_square(U)
    return bool(np.max(np.abs(U @ U.conj().T - np.eye(U.shape[0]))) <= tol)


def haar_random_unitary(m, seed):
    """Draws an m x m unitary from the Haar measure.

    Standard complex Gaussian (Ginibre) matrix, QR factorization, then Q's
    columns rescaled by the phases of R's diagonal.
    """
    if m < 1:
        raise DimensionError(f'Unitary size must be >= 1, got {m}.')
    rng = derive_rng(seed, STREAM_HAAR)
    z = (rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))) / np.sqrt(2)
    q, r = qr(z)
    d = np.diag(r)
    q = q * (d / np.abs(d))
    return as_matrix(q)


def nearest_unitary(U):
    '''Unitary polar factor of U, the closest unitary in Frobenius norm.'''
    u, _ = polar(require_square(U))
    return as_matrix(u)


def prepare_unitary(U, tol=UNITARY_TOL, loose_tol=FIXTURE_UNITARY_TOL):
    U = require_square(U)
    if is_unitary(U, tol):
        return U
    if is_unitary(U, loose_tol):
        logger.warning('Matrix is unitary only to %.1e; projecting onto the nearest unitary.',
                       unitarity_residual(U))
        return nearest_unitary(U)
    raise DomainError(f'Matrix is not unitary (residual {unitarity_residual(U):.3e}).')


def unitary_id(U):
    data = np.ascontiguousarray(require_square(U), dtype=np.complex128).tobytes()
    return hashlib.sha256(data).hexdigest()[:16]


def scattering_submatrix(U, input_state, output_state):
    '''Builds U_{I,O}: row l of U repeated g_l times, column k repeated j_k times.

    Args:
        U: m x m matrix
        input_state, output_state: FockState (or occupation sequences) over m modes
    '''
    U = require_square(U)
    j = _occupations(input_state)
    g = _occupations(output_state)
    m = U.shape[0]
    if len(j) != m or len(g) != m:
        raise DimensionError(
            f'States over {len(j)} and {len(g)} modes do not fit a {m}-mode unitary.')
    if j.sum() != g.sum():
        raise DomainError(f'Photon number mismatch: input has {j.sum()}, output has {g.sum()}.')
    if j.sum() == 0:
        raise DomainError('Scattering submatrix needs at least one photon.')
    rows = np.repeat(np.arange(m), g)
    cols = np.repeat(np.arange(m), j)
    return as_matrix(U[np.ix_(rows, cols)])


def _occupations(state):
    occupations = getattr(state, 'occupations', state)
    return np.asarray(occupations, dtype=np.int64)


def matrix_to_json(U):
    U = as_matrix(U)
    return {
        'rows': int(U.shape[0]),
        'cols': int(U.shape[1]),
        're': U.real.ravel().tolist(),
        'im': U.imag.ravel().tolist(),
    }


def matrix_from_json(obj):
    try:
        rows, cols = int(obj['rows']), int(obj['cols'])
        re = np.asarray(obj['re'], dtype=np.float64)
        im = np.asarray(obj.get('im', [0.0] * (rows * cols)), dtype=np.float64)
    except (KeyError, TypeError, ValueError) as err:
        raise ConfigurationError(f'Malformed matrix JSON: {err}') from err
    if rows < 1 or cols < 1 or re.size != rows * cols or im.size != rows * cols:
        raise ConfigurationError(
            f'Matrix JSON declares {rows}x{cols} but holds {re.size} real / {im.size} imaginary parts.')
    return as_matrix((re + 1j * im).reshape(rows, cols))


def load_matrix(f_path):
    try:
        obj = load_json(f_path)
    except (OSError, ValueError) as err:
        raise ConfigurationError(f'Cannot read matrix file {f_path}: {err}') from err
    return matrix_from_json(obj)


def save_matrix(U, f_path):
    save_json(matrix_to_json(U), f_path)
