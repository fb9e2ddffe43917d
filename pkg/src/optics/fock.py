"""Exact Boson-sampling output distributions.

P(I -> O) = |Per(U_{I,O})|^2 / (prod_i j_i! prod_i g_i!), evaluated for every
output state of the input's photon number. Output states are enumerated in
descending lexicographic order of their occupation tuples (|10> before |01>),
which also fixes the order of the sampling CDF.
"""

import math
import logging
import itertools
import numpy as np
import pandas as pd

from src.linalg.matrices import prepare_unitary, require_square, scattering_submatrix, unitary_id
from src.linalg.permanent import permanent_ryser, permanents_ryser, factorial_weight
from src.utils.errors import (
    ConfigurationError, DimensionError, DomainError, NumericalIntegrityError, SizeLimitError,
)
from src.utils.utils import as_rng, STREAM_SAMPLES_A

logger = logging.getLogger(__name__)

MAX_OUTPUT_STATES = 10**6
NORMALIZATION_TOL = 1e-9
# Submatrices evaluated per Ryser batch; bounds memory at large state counts.
PERMANENT_BATCH = 4096


class FockState(tuple):
    """Occupation-number vector |j_1 ... j_m> (photons per mode)."""

    def __new__(cls, occupations):
        try:
            values = tuple(int(k) for k in occupations)
        except (TypeError, ValueError) as err:
            raise DomainError(f'Occupations must be integers, got {occupations!r}.') from err
        if not values:
            raise DimensionError('A Fock state needs at least one mode.')
        if any(k < 0 for k in values):
            raise DomainError(f'Occupations must be non-negative, got {values}.')
        return super().__new__(cls, values)

    @classmethod
    def parse(cls, text):
        '''Parses an occupation string such as "1,1,0,0,0".'''
        try:
            return cls(int(tok) for tok in str(text).replace(' ', '').split(','))
        except ValueError as err:
            raise ConfigurationError(f'Cannot parse occupation string {text!r}.') from err

    @classmethod
    def single_photons(cls, modes, photons):
        '''|1...10...0> with ``photons`` leading ones.'''
        if not 0 <= photons <= modes:
            raise DomainError(f'Cannot place {photons} single photons in {modes} modes.')
        return cls([1] * photons + [0] * (modes - photons))

    @property
    def occupations(self):
        return tuple(self)

    @property
    def modes(self):
        return len(self)

    @property
    def photons(self):
        return sum(self)

    @property
    def is_collision_free(self):
        return max(self) <= 1

    def __str__(self):
        return ','.join(str(k) for k in self)

    def ket(self):
        return '|' + ''.join(str(k) for k in self) + '>'

    def __repr__(self):
        return f'FockState({self.ket()})'


class OutputDistribution(object):
    """Exact output distribution for one input state and one unitary.

    ``states`` and ``probabilities`` are aligned and in enumeration order.
    """

    def __init__(self, input_state, unitary_id, states, probabilities, postselected=False):
        self.input = FockState(input_state)
        self.unitary_id = unitary_id
        self.states = tuple(FockState(s) for s in states)
        probabilities = np.array(probabilities, dtype=np.float64)
        probabilities.setflags(write=False)
        self.probabilities = probabilities
        self.postselected = postselected
        if len(self.states) != len(self.probabilities):
            raise DimensionError('States and probabilities must have equal length.')

    @property
    def modes(self):
        return self.input.modes

    @property
    def entries(self):
        return list(zip(self.states, self.probabilities.tolist()))

    def __len__(self):
        return len(self.states)

    def occupation_matrix(self):
        '''[num_states, modes] integer array of output occupations.'''
        return np.array(self.states, dtype=np.int64).reshape(len(self.states), self.modes)

    def probability_of(self, state):
        return float(self.probabilities[self.states.index(FockState(state))])

    def to_frame(self):
        return pd.DataFrame({
            'state': [str(s) for s in self.states],
            'probability': self.probabilities,
        })

    def __repr__(self):
        return (f'OutputDistribution(input={self.input.ket()}, unitary={self.unitary_id}, '
                f'states={len(self)})')


def count_outputs(m, n):
    return math.comb(m + n - 1, n)


def enumerate_outputs(m, n):
    if m < 1:
        raise DimensionError(f'Need at least one mode, got m = {m}.')
    if n < 0:
        raise DomainError(f'Photon number must be non-negative, got n = {n}.')
    if count_outputs(m, n) > MAX_OUTPUT_STATES:
        raise SizeLimitError(
            f'C({m + n - 1}, {n}) = {count_outputs(m, n)} output states exceeds the limit of {MAX_OUTPUT_STATES}.')
    states = []
    for modes in itertools.combinations_with_replacement(range(m), n):
        occupations = [0] * m
        for mode in modes:
            occupations[mode] += 1
        states.append(FockState(occupations))
    return states


def _check_states(U, input_state, output_state=None):
    m = U.shape[0]
    states = [input_state] if output_state is None else [input_state, output_state]
    for state in states:
        if len(state) != m:
            raise DimensionError(f'State {state!r} has {len(state)} modes, unitary has {m}.')
    if output_state is not None and sum(input_state) != sum(output_state):
        raise DomainError(
            f'Photon number mismatch: input has {sum(input_state)}, output has {sum(output_state)}.')


def output_probability(U, input_state, output_state):
    U = require_square(U)
    input_state, output_state = FockState(input_state), FockState(output_state)
    _check_states(U, input_state, output_state)
    if input_state.photons == 0:
        return 1.0
    amplitude = permanent_ryser(scattering_submatrix(U, input_state, output_state))
    weight = factorial_weight(input_state) * factorial_weight(output_state)
    return abs(amplitude) ** 2 / weight


def _probabilities(U, input_state, states):
    n = input_state.photons
    if n == 0:
        return np.ones(len(states))
    m = U.shape[0]
    cols = np.repeat(np.arange(m), input_state)
    occupations = np.array(states, dtype=np.int64).reshape(len(states), m)
    # Row indices of U_{I,O} for every output at once: [num_states, n].
    rows = np.stack([np.repeat(np.arange(m), g) for g in occupations])
    weights = np.array([factorial_weight(g) for g in occupations], dtype=np.float64)
    weights *= factorial_weight(input_state)
    probabilities = np.empty(len(states))
    for start in range(0, len(states), PERMANENT_BATCH):
        chunk = rows[start:start + PERMANENT_BATCH]
        stack = U[chunk[:, :, None], cols[None, None, :]]
        probabilities[start:start + len(chunk)] = np.abs(permanents_ryser(stack)) ** 2
    return probabilities / weights


def full_distribution(U, input_state):
    U = prepare_unitary(U)
    input_state = FockState(input_state)
    _check_states(U, input_state)
    states = enumerate_outputs(U.shape[0], input_state.photons)
    probabilities = _probabilities(U, input_state, states)
    residual = abs(probabilities.sum() - 1.0)
    if residual > NORMALIZATION_TOL:
        raise NumericalIntegrityError(
            f'Output distribution of {input_state.ket()} sums to 1 {probabilities.sum() - 1.0:+.3e}.')
    logger.debug('Built distribution for %s over %d states (residual %.2e).',
                 input_state.ket(), len(states), residual)
    return OutputDistribution(input_state, unitary_id(U), states, probabilities)


def postselect_collision_free(dist):
    '''Keeps only collision-free outputs and renormalizes.

    Emulates recording two-detector coincidences with detectors that cannot
    resolve photon number.
    '''
    keep = [i for i, s in enumerate(dist.states) if s.is_collision_free]
    mass = float(dist.probabilities[keep].sum()) if keep else 0.0
    if mass <= 0.0:
        raise DomainError(f'No collision-free output of {dist.input.ket()} has non-zero probability.')
    return OutputDistribution(
        dist.input, dist.unitary_id,
        [dist.states[i] for i in keep], dist.probabilities[keep] / mass,
        postselected=True,
    )


def _cdf(dist):
    cdf = np.cumsum(dist.probabilities)
    cdf[-1] = 1.0
    return cdf


def sample_indices(dist, count, seed):
    '''Indices into ``dist.states`` of ``count`` i.i.d. inverse-CDF draws.'''
    if count < 0:
        raise DomainError(f'Sample count must be non-negative, got {count}.')
    rng = as_rng(seed, STREAM_SAMPLES_A)
    u = rng.random(int(count))
    return np.searchsorted(_cdf(dist), u, side='right')


def sample(dist, count, seed):
    return [dist.states[i] for i in sample_indices(dist, count, seed)]


def collision_statistics(U, input_state):
    dist = full_distribution(U, input_state)
    collided = np.array([not s.is_collision_free for s in dist.states])
    p_multi = float(dist.probabilities[collided].sum())
    return 1.0 - p_multi, p_multi


def collision_trend(U, photon_numbers):
    '''Single-/multi-photon probabilities for inputs |1..10..0> of growing size.'''
    U = require_square(U)
    rows = []
    for n in photon_numbers:
        p_single, p_multi = collision_statistics(U, FockState.single_photons(U.shape[0], n))
        rows.append({'photons': n, 'p_single': p_single, 'p_multi': p_multi})
    return pd.DataFrame(rows, columns=['photons', 'p_single', 'p_multi'])


def empirical_distribution(samples, dist):
    '''Relative frequency of every state of ``dist`` among ``samples``.'''
    index = {s: i for i, s in enumerate(dist.states)}
    counts = np.zeros(len(dist.states))
    for s in samples:
        try:
            counts[index[FockState(s)]] += 1
        except KeyError as err:
            raise DomainError(f'Sample {s!r} is not an output state of {dist!r}.') from err
    if counts.sum() == 0:
        raise DomainError('Empirical distribution needs at least one sample.')
    return counts / counts.sum()


def total_variation_distance(p, q):
    p = np.asarray(getattr(p, 'probabilities', p), dtype=np.float64)
    q = np.asarray(getattr(q, 'probabilities', q), dtype=np.float64)
    if p.shape != q.shape:
        raise DimensionError(f'Cannot compare distributions of shapes {p.shape} and {q.shape}.')
    return 0.5 * float(np.abs(p - q).sum())


def distance_from_uniform(dist):
    k = len(dist)
    return total_variation_distance(dist.probabilities, np.full(k, 1.0 / k))


def save_distribution_csv(dist, f_path, drop_zero=False):
    frame = dist.to_frame()
    if drop_zero:
        frame = frame[frame['probability'] > 0]
    frame.to_csv(f_path, index=False, float_format='%.17g')


def load_distribution_csv(f_path):
    frame = pd.read_csv(f_path, dtype={'state': str})
    return [(FockState.parse(s), float(p)) for s, p in zip(frame['state'], frame['probability'])]
