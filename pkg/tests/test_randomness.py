import json
import math
import numpy as np
import pytest

from src.randomness.nist import (
    ALPHA, BATTERY, TestResult, approximate_entropy, battery_frame, battery_passed,
    binary_matrix_rank, block_frequency, cumulative_sums, dft_spectral, frequency_monobit,
    gf2_rank, longest_run_of_ones, rank_class_probabilities, run_battery, runs,
    save_battery_report, serial,
)
from src.utils.errors import DomainError, InsufficientDataError
from src.utils.utils import derive_rng

N = 10**6
ZEROS = np.zeros(N, dtype=np.uint8)
ALTERNATING = np.tile(np.array([0, 1], dtype=np.uint8), N // 2)
FREQUENCY_TESTS = ('frequency_monobit', 'block_frequency', 'cumulative_sums')


def reference_bits(seed, n=N):
    return derive_rng(seed, 77).integers(0, 2, size=n, dtype=np.uint8)


# Worked examples of the NIST documentation, on sequences shorter than the
# recommended minimum lengths.

def test_monobit_worked_example():
    result = frequency_monobit('1011010101', strict=False)
    assert result.p_value == pytest.approx(0.527089, abs=1e-6)
    assert result.passed


def test_block_frequency_worked_example():
    result = block_frequency('0110011010', block_len=3, strict=False)
    assert result.p_value == pytest.approx(0.801252, abs=1e-6)


def test_runs_worked_example():
    result = runs('1001101011', strict=False)
    assert result.p_value == pytest.approx(0.147232, abs=1e-6)
    assert result.metadata['runs'] == 7


def test_cumulative_sums_worked_example():
    result = cumulative_sums('1011010101', strict=False)
    assert result.metadata['max_excursion_forward'] == 1
    assert result.p_values[0] == pytest.approx(0.4116588, abs=1e-6)


def test_approximate_entropy_worked_example():
    result = approximate_entropy('0100110101', m_len=3, strict=False)
    assert result.metadata['ap_en'] == pytest.approx(0.190954, abs=1e-5)
    assert result.p_value == pytest.approx(0.261961, abs=1e-5)


def test_serial_worked_example():
    result = serial('0011011101', m_len=3, strict=False)
    assert result.p_values == pytest.approx([0.808792, 0.670320], abs=1e-6)


def test_all_zeros_fails_every_test():
    results = run_battery(ZEROS)
    assert [r.test_name for r in results] == [name for name, _ in BATTERY]
    assert not any(r.passed for r in results)
    assert all(r.p_values for r in results)
    assert not battery_passed(results)


def test_all_zeros_runs_prerequisite():
    result = runs(ZEROS)
    assert result.p_values == [0.0]
    assert not result.passed
    assert 'prerequisite' in result.reason


def test_alternating_control_stream():
    results = {r.test_name: r for r in run_battery(ALTERNATING)}
    assert results['frequency_monobit'].p_value == pytest.approx(1.0)
    assert results['cumulative_sums'].metadata['max_excursion_forward'] == 1
    assert results['cumulative_sums'].p_value > 0.99
    passing = {name for name, r in results.items() if r.passed}
    assert passing == {'frequency_monobit', 'block_frequency', 'cumulative_sums'}


def test_alternating_longest_runs_all_in_lowest_class():
    result = longest_run_of_ones(ALTERNATING)
    assert result.metadata['block_len'] == 10000
    assert result.metadata['class_counts'][0] == N // 10000
    assert not result.passed


def test_alternating_tone_breaks_spectral_bound():
    result = dft_spectral(ALTERNATING)
    assert result.metadata['truncated']
    assert result.metadata['n_used'] == 2**19
    assert not result.passed


def test_serial_de_bruijn_sequence_is_perfectly_balanced():
    bits = np.tile(np.array([0, 0, 0, 1, 0, 1, 1, 1], dtype=np.uint8), 128)
    result = serial(bits, m_len=3)
    assert result.metadata['del_psi_sq'] == pytest.approx(0.0, abs=1e-9)
    assert result.p_values == pytest.approx([1.0, 1.0])


def test_identity_blocks_have_full_rank():
    block = np.eye(32, dtype=np.uint8).ravel()
    result = binary_matrix_rank(np.tile(block, 100))
    assert result.metadata['class_counts'] == [100, 0, 0]
    assert not result.passed


@pytest.mark.parametrize('test, bits', [
    (frequency_monobit, 99),
    (block_frequency, 99),
    (runs, 99),
    (cumulative_sums, 99),
    (longest_run_of_ones, 127),
    (dft_spectral, 999),
    (serial, 2**18),
    (approximate_entropy, 2**15),
    (binary_matrix_rank, 38 * 1024 - 1),
])
def test_length_guards(test, bits):
    with pytest.raises(InsufficientDataError):
        test(reference_bits(1, bits))


def test_length_guards_lifted_at_minimum():
    assert serial(reference_bits(2, 2**19)).p_values
    assert approximate_entropy(reference_bits(3, 2**16)).p_values
    assert binary_matrix_rank(reference_bits(4, 38 * 1024)).metadata['matrices'] == 38


def test_longest_run_needs_128_bits_even_when_not_strict():
    with pytest.raises(InsufficientDataError):
        longest_run_of_ones('1' * 127, strict=False)


def test_block_frequency_small_block_only_when_not_strict():
    with pytest.raises(InsufficientDataError):
        block_frequency(reference_bits(5, 1000), block_len=10)
    assert block_frequency(reference_bits(5, 1000), block_len=10, strict=False).metadata['blocks'] == 100


def test_non_bit_values_rejected():
    with pytest.raises(DomainError):
        frequency_monobit(np.array([0, 1, 2] * 50))


@pytest.mark.parametrize('test', [
    frequency_monobit,
    block_frequency,
    runs,
    cumulative_sums,
    dft_spectral,
    lambda x: serial(x, m_len=4),
    lambda x: approximate_entropy(x, m_len=4),
])
def test_complement_symmetry(test):
    bits = reference_bits(6, 4096)
    assert test(1 - bits).p_values == pytest.approx(test(bits).p_values, rel=1e-9, abs=1e-12)


def test_reversal_symmetry_on_biased_stream():
    bits = reference_bits(13, 10**5).copy()
    bits[:3000] = 1
    reversed_bits = bits[::-1]
    monobit = frequency_monobit(bits)
    assert not monobit.passed
    assert frequency_monobit(reversed_bits).p_values == pytest.approx(monobit.p_values, rel=1e-9)
    forward, backward = cumulative_sums(bits).p_values
    reversed_forward, reversed_backward = cumulative_sums(reversed_bits).p_values
    assert reversed_forward == pytest.approx(backward, rel=1e-9, abs=1e-300)
    assert reversed_backward == pytest.approx(forward, rel=1e-9, abs=1e-300)


def test_rank_class_probabilities():
    probabilities = rank_class_probabilities()
    assert probabilities == pytest.approx((0.2888, 0.5776, 0.1336), abs=1e-4)
    assert sum(probabilities) == pytest.approx(1.0)


def test_gf2_rank_examples():
    assert gf2_rank(np.eye(4, dtype=np.uint8)) == 4
    assert gf2_rank(np.zeros((3, 3), dtype=np.uint8)) == 0
    assert gf2_rank([[1, 1], [1, 1]]) == 1
    # Third row is the XOR of the first two.
    assert gf2_rank([[1, 0, 1], [0, 1, 1], [1, 1, 0]]) == 2
    assert gf2_rank([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0]]) == 3


def test_gf2_rank_of_random_matrices_matches_class_probabilities():
    rng = derive_rng(8)
    ranks = np.array([gf2_rank(rng.integers(0, 2, size=(32, 32))) for _ in range(2000)])
    assert ranks.max() <= 32
    assert np.mean(ranks == 32) == pytest.approx(0.2888, abs=0.04)
    assert np.mean(ranks == 31) == pytest.approx(0.5776, abs=0.04)


def test_result_passes_only_when_every_p_value_clears_alpha():
    result = serial(reference_bits(9, 2**19))
    assert result.passed == all(p >= ALPHA for p in result.p_values)
    assert len(result.p_values) == 2
    assert result.p_value == min(result.p_values)


def test_reference_generator_approximate_entropy_tends_to_ln2():
    result = approximate_entropy(reference_bits(10))
    assert result.metadata['ap_en'] == pytest.approx(math.log(2), abs=2e-3)


def test_reference_generator_passes_battery():
    results = run_battery(reference_bits(11))
    assert sum(not r.passed for r in results) <= 1


def test_mode_major_pipeline_stream_passes_battery(mode_major_stream):
    results = run_battery(mode_major_stream)
    assert all(r.p_values for r in results)
    assert battery_passed(results)


def test_pair_major_pipeline_stream_passes_frequency_tests(pair_major_stream):
    results = {r.test_name: r for r in run_battery(pair_major_stream)}
    assert all(results[name].passed for name in FREQUENCY_TESTS)


STRUCTURE_TESTS = ('runs', 'longest_run_of_ones', 'dft_spectral', 'serial', 'approximate_entropy')


def test_pair_major_pipeline_stream_fails_structure_tests(pair_major_stream):
    # Bits of one pair come from modes that share two photons, so the stream
    # is unbiased but serially correlated.
    results = {r.test_name: r for r in run_battery(pair_major_stream)}
    for name in STRUCTURE_TESTS:
        assert not results[name].passed, name
        assert results[name].p_value < 1e-6, name


def test_short_stream_battery_reports_instead_of_raising():
    results = run_battery(reference_bits(12, 5000))
    by_name = {r.test_name: r for r in results}
    for name in ('serial', 'approximate_entropy', 'binary_matrix_rank'):
        assert by_name[name].p_values == []
        assert not by_name[name].passed
        assert by_name[name].reason
    assert by_name['frequency_monobit'].p_values


def test_battery_frame_and_report(tmp_path):
    results = [TestResult('runs', [0.5], True, 100),
               TestResult('serial', [], False, 100, reason='too short')]
    frame = battery_frame(results)
    assert list(frame.columns) == ['test', 'p_values', 'passed', 'n_bits', 'note']
    assert frame['p_values'].tolist() == ['0.500000', '-']
    path = tmp_path / 'report.json'
    save_battery_report(results, path)
    report = json.loads(path.read_text())
    assert report[0] == {'test': 'runs', 'p_values': [0.5], 'passed': True, 'n_bits': 100}
    assert report[1]['reason'] == 'too short'


@pytest.mark.slow
def test_reference_calibration_pass_proportions():
    failures = {}
    for seed in range(100):
        for result in run_battery(reference_bits(1000 + seed)):
            for i, p in enumerate(result.p_values):
                failures.setdefault((result.test_name, i), 0)
                failures[(result.test_name, i)] += p < ALPHA
    assert len(failures) == 11
    assert all(count <= 4 for count in failures.values()), failures
