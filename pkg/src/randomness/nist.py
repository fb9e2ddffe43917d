"""Nine tests of the NIST SP 800-22 statistical battery.

Every test takes a 0/1 sequence and returns a TestResult whose p-values are
judged at alpha = 0.01. Statistics follow the SP 800-22 rev. 1a definitions;
the special functions (erfc, regularized upper incomplete gamma, normal CDF)
come from scipy.special / scipy.stats.

Each test enforces its minimum input length unless called with
``strict=False``; the battery turns length failures into failed results
instead of raising.
"""

import math
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional
import numpy as np
import pandas as pd
from scipy.special import erfc, gammaincc
from scipy.stats import norm

from src.utils.errors import DomainError, InsufficientDataError
from src.utils.utils import save_json

logger = logging.getLogger(__name__)

ALPHA = 0.01

BLOCK_FREQUENCY_M = 128
SERIAL_M = 16
APPROXIMATE_ENTROPY_M = 10
RANK_ROWS = RANK_COLS = 32
RANK_MIN_MATRICES = 38
DFT_THRESHOLD_FRACTION = 0.95
# Shortest input any test of the battery accepts.
MIN_BATTERY_BITS = 100

# (minimum n, block length M, class upper bounds v_0.. and class probabilities)
LONGEST_RUN_REGIMES = (
    (750000, 10000, (10, 11, 12, 13, 14, 15),
     (0.0882, 0.2092, 0.2483, 0.1933, 0.1208, 0.0675, 0.0727)),
    (6272, 128, (4, 5, 6, 7, 8),
     (0.1174, 0.2430, 0.2493, 0.1752, 0.1027, 0.1124)),
    (128, 8, (1, 2, 3),
     (0.2148, 0.3672, 0.2305, 0.1875)),
)


@dataclass
class TestResult:
    test_name: str
    p_values: List[float]
    passed: bool
    n_bits: int
    reason: Optional[str] = None
    metadata: Dict = field(default_factory=dict)

    # pytest must not collect this class.
    __test__ = False

    @property
    def p_value(self):
        return min(self.p_values) if self.p_values else float('nan')

    def to_dict(self):
        record = {'test': self.test_name, 'p_values': list(self.p_values),
                  'passed': self.passed, 'n_bits': self.n_bits}
        if self.reason:
            record['reason'] = self.reason
        if self.metadata:
            record['metadata'] = dict(self.metadata)
        return record


def _result(name, p_values, n, **metadata):
    p_values = [float(min(max(p, 0.0), 1.0)) for p in p_values]
    return TestResult(name, p_values, all(p >= ALPHA for p in p_values), n,
                      metadata=metadata)


def _bits(bits):
    values = np.asarray(getattr(bits, 'bits', bits))
    if values.dtype.kind in 'US':
        values = np.frombuffer(''.join(str(v) for v in values.ravel()).encode(), dtype=np.uint8) - ord('0')
    values = np.asarray(values, dtype=np.int8).ravel()
    if values.size and (values.min() < 0 or values.max() > 1):
        raise DomainError('Bit sequences may only hold 0 and 1.')
    return values


def _require(n, minimum, name, strict):
    if strict and n < minimum:
        raise InsufficientDataError(f'{name} needs at least {minimum} bits, got {n}.')
    if n == 0:
        raise InsufficientDataError(f'{name} needs a non-empty sequence.')


def frequency_monobit(bits, strict=True):
    x = _bits(bits)
    n = x.size
    _require(n, 100, 'frequency_monobit', strict)
    s_n = int(2 * x.sum()) - n
    s_obs = abs(s_n) / math.sqrt(n)
    return _result('frequency_monobit', [erfc(s_obs / math.sqrt(2))], n, s_n=s_n)


def block_frequency(bits, block_len=BLOCK_FREQUENCY_M, strict=True):
    x = _bits(bits)
    n = x.size
    _require(n, 100, 'block_frequency', strict)
    if strict and block_len < 20:
        raise InsufficientDataError(f'block_frequency needs M >= 20, got {block_len}.')
    blocks = n // block_len
    if blocks < 1:
        raise InsufficientDataError(f'block_frequency needs at least one block of {block_len} bits.')
    pi = x[:blocks * block_len].reshape(blocks, block_len).mean(axis=1)
    chi_sq = 4.0 * block_len * float(np.sum((pi - 0.5) ** 2))
    return _result('block_frequency', [gammaincc(blocks / 2.0, chi_sq / 2.0)], n,
                   block_len=block_len, blocks=blocks, chi_square=chi_sq)


def runs(bits, strict=True):
    x = _bits(bits)
    n = x.size
    _require(n, 100, 'runs', strict)
    pi = x.mean()
    tau = 2.0 / math.sqrt(n)
    if abs(pi - 0.5) >= tau:
        result = TestResult('runs', [0.0], False, n,
                            reason=f'frequency prerequisite failed: |pi - 1/2| = {abs(pi - 0.5):.4g} >= {tau:.4g}')
        return result
    v_obs = 1 + int(np.count_nonzero(x[1:] != x[:-1]))
    p = erfc(abs(v_obs - 2.0 * n * pi * (1 - pi)) / (2.0 * math.sqrt(2.0 * n) * pi * (1 - pi)))
    return _result('runs', [p], n, runs=v_obs)


def _longest_run(block):
    padded = np.concatenate(([0], block, [0]))
    edges = np.diff(padded)
    starts = np.flatnonzero(edges == 1)
    if starts.size == 0:
        return 0
    ends = np.flatnonzero(edges == -1)
    return int((ends - starts).max())


def longest_run_of_ones(bits, strict=True):
    x = _bits(bits)
    n = x.size
    if n < 128:
        raise InsufficientDataError(f'longest_run_of_ones needs at least 128 bits, got {n}.')
    for minimum, block_len, bounds, probabilities in LONGEST_RUN_REGIMES:
        if n >= minimum:
            break
    blocks = n // block_len
    longest = np.array([_longest_run(b) for b in x[:blocks * block_len].reshape(blocks, block_len)])
    # Class i holds runs <= bounds[0] (i = 0), == bounds[i] (middle) or > bounds[-1] (last).
    classes = np.searchsorted(np.array(bounds), np.clip(longest, bounds[0], bounds[-1] + 1))
    counts = np.bincount(classes, minlength=len(probabilities))
    expected = blocks * np.array(probabilities)
    chi_sq = float(np.sum((counts - expected) ** 2 / expected))
    k = len(probabilities) - 1
    return _result('longest_run_of_ones', [gammaincc(k / 2.0, chi_sq / 2.0)], n,
                   block_len=block_len, class_counts=counts.tolist(), chi_square=chi_sq)


def _cusum_p_value(z, n):
    sqrt_n = math.sqrt(n)
    k1 = np.arange(int((-n / z + 1) / 4), int((n / z - 1) / 4) + 1)
    k2 = np.arange(int((-n / z - 3) / 4), int((n / z - 1) / 4) + 1)
    term1 = np.sum(norm.cdf((4 * k1 + 1) * z / sqrt_n) - norm.cdf((4 * k1 - 1) * z / sqrt_n))
    term2 = np.sum(norm.cdf((4 * k2 + 3) * z / sqrt_n) - norm.cdf((4 * k2 + 1) * z / sqrt_n))
    return 1.0 - term1 + term2


def cumulative_sums(bits, strict=True):
    '''Forward and backward cumulative-sums test; p_values = [forward, backward].'''
    x = _bits(bits)
    n = x.size
    _require(n, 100, 'cumulative_sums', strict)
    steps = 2 * x.astype(np.int64) - 1
    z_forward = int(np.abs(np.cumsum(steps)).max())
    z_backward = int(np.abs(np.cumsum(steps[::-1])).max())
    return _result('cumulative_sums',
                   [_cusum_p_value(z_forward, n), _cusum_p_value(z_backward, n)], n,
                   max_excursion_forward=z_forward, max_excursion_backward=z_backward)


def dft_spectral(bits, strict=True):
    x = _bits(bits)
    n = x.size
    _require(n, 1000, 'dft_spectral', strict)
    # Power-of-two transform length: the sequence is truncated, never padded.
    n_used = 1 << (n.bit_length() - 1)
    if n_used != n:
        logger.info('dft_spectral: truncating %d bits to %d.', n, n_used)
    steps = 2.0 * x[:n_used] - 1.0
    modulus = np.abs(np.fft.fft(steps)[:n_used // 2])
    threshold = math.sqrt(math.log(1.0 / 0.05) * n_used)
    n0 = DFT_THRESHOLD_FRACTION * n_used / 2.0
    n1 = int(np.count_nonzero(modulus < threshold))
    d = (n1 - n0) / math.sqrt(n_used * DFT_THRESHOLD_FRACTION * (1 - DFT_THRESHOLD_FRACTION) / 4.0)
    return _result('dft_spectral', [erfc(abs(d) / math.sqrt(2))], n,
                   n_used=n_used, truncated=n_used != n, peaks_below_threshold=n1)


def _pattern_counts(x, m):
    '''Counts of all overlapping m-bit patterns, with wrap-around.'''
    if m == 0:
        return np.array([x.size])
    n = x.size
    extended = np.concatenate((x, x[:m - 1])).astype(np.int64)
    values = np.zeros(n, dtype=np.int64)
    for j in range(m):
        values = (values << 1) | extended[j:j + n]
    return np.bincount(values, minlength=1 << m)


def _psi_sq(x, m):
    if m <= 0:
        return 0.0
    counts = _pattern_counts(x, m).astype(np.float64)
    n = x.size
    return float((1 << m) / n * np.sum(counts ** 2) - n)


def serial(bits, m_len=SERIAL_M, strict=True):
    x = _bits(bits)
    n = x.size
    _require(n, 1, 'serial', strict)
    if m_len < 2:
        raise DomainError(f'serial needs m >= 2, got {m_len}.')
    if strict and not m_len < int(math.log2(n)) - 2:
        raise InsufficientDataError(
            f'serial with m = {m_len} needs m < floor(log2 n) - 2; n = {n} is too short.')
    psi_m, psi_m1, psi_m2 = _psi_sq(x, m_len), _psi_sq(x, m_len - 1), _psi_sq(x, m_len - 2)
    delta1 = psi_m - psi_m1
    delta2 = psi_m - 2 * psi_m1 + psi_m2
    p1 = gammaincc(2.0 ** (m_len - 2), delta1 / 2.0)
    p2 = gammaincc(2.0 ** (m_len - 3), delta2 / 2.0)
    return _result('serial', [p1, p2], n, m=m_len, del_psi_sq=delta1, del2_psi_sq=delta2)


def _phi(x, m):
    counts = _pattern_counts(x, m).astype(np.float64)
    c = counts[counts > 0] / x.size
    return float(np.sum(c * np.log(c)))


def approximate_entropy(bits, m_len=APPROXIMATE_ENTROPY_M, strict=True):
    x = _bits(bits)
    n = x.size
    _require(n, 1, 'approximate_entropy', strict)
    if m_len < 1:
        raise DomainError(f'approximate_entropy needs m >= 1, got {m_len}.')
    if strict and not m_len < int(math.log2(n)) - 5:
        raise InsufficientDataError(
            f'approximate_entropy with m = {m_len} needs m < floor(log2 n) - 5; n = {n} is too short.')
    ap_en = _phi(x, m_len) - _phi(x, m_len + 1)
    chi_sq = 2.0 * n * (math.log(2) - ap_en)
    p = gammaincc(2.0 ** (m_len - 1), chi_sq / 2.0)
    return _result('approximate_entropy', [p], n, m=m_len, ap_en=ap_en, chi_square=chi_sq)


def gf2_rank(matrix):
    '''Rank over GF(2) of a 0/1 matrix.'''
    rows = np.array(matrix, dtype=np.uint8) & 1
    n_rows, n_cols = rows.shape
    rank = 0
    for col in range(n_cols):
        pivots = np.flatnonzero(rows[rank:, col]) + rank
        if pivots.size == 0:
            continue
        pivot = pivots[0]
        if pivot != rank:
            rows[[rank, pivot]] = rows[[pivot, rank]]
        below = np.flatnonzero(rows[:, col])
        below = below[below != rank]
        rows[below] ^= rows[rank]
        rank += 1
        if rank == n_rows:
            break
    return rank


def rank_class_probabilities(rows=RANK_ROWS, cols=RANK_COLS):
    '''Probabilities of rank = full, full - 1 and lower for random GF(2) matrices.'''
    def p_rank(r):
        product = 1.0
        for i in range(r):
            product *= ((1 - 2.0 ** (i - rows)) * (1 - 2.0 ** (i - cols))) / (1 - 2.0 ** (i - r))
        return 2.0 ** (r * (rows + cols - r) - rows * cols) * product

    full = min(rows, cols)
    p_full, p_minus = p_rank(full), p_rank(full - 1)
    return p_full, p_minus, 1.0 - p_full - p_minus


def binary_matrix_rank(bits, strict=True):
    x = _bits(bits)
    n = x.size
    block = RANK_ROWS * RANK_COLS
    matrices = n // block
    if matrices < (RANK_MIN_MATRICES if strict else 1):
        raise InsufficientDataError(
            f'binary_matrix_rank needs {RANK_MIN_MATRICES} matrices ({RANK_MIN_MATRICES * block} bits), got {n} bits.')
    ranks = np.array([
        gf2_rank(m) for m in x[:matrices * block].reshape(matrices, RANK_ROWS, RANK_COLS)
    ])
    full = min(RANK_ROWS, RANK_COLS)
    observed = np.array([np.sum(ranks == full), np.sum(ranks == full - 1), np.sum(ranks < full - 1)])
    expected = matrices * np.array(rank_class_probabilities())
    chi_sq = float(np.sum((observed - expected) ** 2 / expected))
    return _result('binary_matrix_rank', [gammaincc(1.0, chi_sq / 2.0)], n,
                   matrices=matrices, class_counts=observed.tolist(), chi_square=chi_sq)


BATTERY = (
    ('frequency_monobit', frequency_monobit),
    ('block_frequency', block_frequency),
    ('runs', runs),
    ('longest_run_of_ones', longest_run_of_ones),
    ('cumulative_sums', cumulative_sums),
    ('dft_spectral', dft_spectral),
    ('serial', serial),
    ('approximate_entropy', approximate_entropy),
    ('binary_matrix_rank', binary_matrix_rank),
)


def run_battery(bits):
    x = _bits(bits)
    results = []
    for name, test in BATTERY:
        try:
            result = test(x)
        except InsufficientDataError as err:
            result = TestResult(name, [], False, int(x.size), reason=str(err))
        logger.info('%-22s %s  p = %s', name, 'PASS' if result.passed else 'FAIL',
                    ', '.join(f'{p:.6f}' for p in result.p_values) or '-')
        results.append(result)
    return results


def battery_passed(results):
    return all(r.passed for r in results)


def battery_frame(results):
    return pd.DataFrame([{
        'test': r.test_name,
        'p_values': ', '.join(f'{p:.6f}' for p in r.p_values) or '-',
        'passed': r.passed,
        'n_bits': r.n_bits,
        'note': r.reason or '',
    } for r in results])


def save_battery_report(results, f_path):
    save_json([r.to_dict() for r in results], f_path)
