"""Von Neumann post-processing of Boson-sampling click patterns.

Steps: draw a pair of samples (S1, S2), reduce both to click patterns, code
every mode as 0 (click, no click), 1 (no click, click) or discard, emit the
retained codes in mode order 1..m, repeat until enough bits exist.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Union
import numpy as np
import pandas as pd
from tqdm import tqdm

from src.linalg.matrices import haar_random_unitary
from src.optics.fock import (
    FockState, full_distribution, postselect_collision_free, sample_indices,
)
from src.optics.interferometer import MeshParameters, build_unitary
from src.utils.errors import ConfigurationError, DimensionError, DomainError, NoEntropyError
from src.utils.utils import (
    derive_rng, STREAM_SAMPLES_A, STREAM_SAMPLES_B, STREAM_PAIR_SELECTION, STREAM_BRANCHING,
)

logger = logging.getLogger(__name__)

DISCARD = None
CONSECUTIVE = 'consecutive'
RANDOM_PAIR = 'random_pair'
PAIR_MAJOR = 'pair_major'
MODE_MAJOR = 'mode_major'

# Consecutive fully-discarded pairs tolerated before giving up.
NO_ENTROPY_BUDGET = 10**6
PAIRS_PER_BATCH = 1 << 16
BIAS_SIGMAS = 4.0


class ClickPattern(tuple):
    """Per-mode detector record: True where one or more photons arrived."""

    def __new__(cls, clicks):
        return super().__new__(cls, (bool(c) for c in clicks))

    def __str__(self):
        return ''.join('1' if c else '0' for c in self)


def to_clicks(state):
    return ClickPattern(k > 0 for k in state)


def von_neumann_extract(s1, s2):
    '''Per-mode codes for one pair: 0, 1 or DISCARD (None).'''
    if len(s1) != len(s2):
        raise DomainError(f'Click patterns of length {len(s1)} and {len(s2)} cannot be paired.')
    codes = []
    for c1, c2 in zip(s1, s2):
        if c1 == c2:
            codes.append(DISCARD)
        else:
            codes.append(0 if c1 else 1)
    return tuple(codes)


def retained_bits(codes):
    return [c for c in codes if c is not DISCARD]


@dataclass(frozen=True)
class GeneratorConfig:
    unitary: Union[np.ndarray, MeshParameters]
    input: FockState
    postselect_collision_free: bool = False
    pairing: str = CONSECUTIVE
    pairing_t: Optional[int] = None
    seed: int = 0
    # Adversarial source: S2 of every pair is drawn from this input instead.
    alternate_input: Optional[FockState] = None
    emission: str = PAIR_MAJOR

    def __post_init__(self):
        object.__setattr__(self, 'input', FockState(self.input))
        if self.alternate_input is not None:
            object.__setattr__(self, 'alternate_input', FockState(self.alternate_input))
        if self.pairing == RANDOM_PAIR:
            if self.pairing_t is None or int(self.pairing_t) <= 2:
                raise ConfigurationError(
                    f'Random-pair selection needs T > 2 samples per round, got T = {self.pairing_t}.')
        elif self.pairing != CONSECUTIVE:
            raise ConfigurationError(f'Unknown pairing mode {self.pairing!r}.')
        if self.emission not in (PAIR_MAJOR, MODE_MAJOR):
            raise ConfigurationError(f'Unknown emission order {self.emission!r}.')

    def resolve_unitary(self):
        if isinstance(self.unitary, MeshParameters):
            return build_unitary(self.unitary)
        return self.unitary


@dataclass(frozen=True)
class BitStreamMeta:
    unitary_id: str
    input_state: str
    sample_pairs_consumed: int
    seed: int
    modes: int
    pairing: str = CONSECUTIVE
    emission: str = PAIR_MAJOR
    alternate_input: Optional[str] = None

    def to_dict(self):
        return dict(self.__dict__)


@dataclass(frozen=True)
class BitStream:
    bits: np.ndarray
    meta: Optional[BitStreamMeta] = None

    def __post_init__(self):
        bits = np.array(self.bits, dtype=np.uint8).ravel()
        if bits.size and bits.max() > 1:
            raise DomainError('Bit streams may only hold 0 and 1.')
        bits.setflags(write=False)
        object.__setattr__(self, 'bits', bits)

    def __len__(self):
        return int(self.bits.size)

    def __str__(self):
        return ''.join('1' if b else '0' for b in self.bits)

    @classmethod
    def from_string(cls, text):
        return cls(np.frombuffer(''.join(str(text).split()).encode(), dtype=np.uint8) - ord('0'))


def click_matrix(dist):
    '''[num_states, modes] boolean click pattern of every output state.'''
    return dist.occupation_matrix() > 0


def click_marginals(dist):
    '''Per-mode probability that the mode's detector clicks.'''
    return dist.probabilities @ click_matrix(dist)


def mode_bit_probabilities(dist_a, dist_b=None):
    '''Analytical per-mode P_x(0) and P_x(1) for S1 ~ dist_a, S2 ~ dist_b.'''
    q1 = click_marginals(dist_a)
    q2 = q1 if dist_b is None else click_marginals(dist_b)
    if q1.shape != q2.shape:
        raise DimensionError('Both sources must act on the same number of modes.')
    return q1 * (1.0 - q2), (1.0 - q1) * q2


def expected_p1(dist_a, dist_b=None):
    p0, p1 = mode_bit_probabilities(dist_a, dist_b)
    retained = p0.sum() + p1.sum()
    return float(p1.sum() / retained) if retained > 0 else float('nan')


def _distributions(cfg):
    U = cfg.resolve_unitary()
    dist_a = full_distribution(U, cfg.input)
    dist_b = None if cfg.alternate_input is None else full_distribution(U, cfg.alternate_input)
    if cfg.postselect_collision_free:
        dist_a = postselect_collision_free(dist_a)
        dist_b = None if dist_b is None else postselect_collision_free(dist_b)
    return dist_a, dist_b


class _PairSource(object):
    """Yields batches of (S1, S2) click patterns according to a GeneratorConfig."""

    def __init__(self, cfg, dist_a, dist_b=None):
        self.cfg = cfg
        self.dist_a = dist_a
        self.clicks_a = click_matrix(dist_a)
        self.rng_a = derive_rng(cfg.seed, STREAM_SAMPLES_A)
        self.dist_b = dist_b
        if dist_b is not None:
            self.clicks_b = click_matrix(dist_b)
            self.rng_b = derive_rng(cfg.seed, STREAM_SAMPLES_B)
        else:
            self.clicks_b = None
        self.rng_pairs = derive_rng(cfg.seed, STREAM_PAIR_SELECTION)

    def next_batch(self, pairs):
        cfg = self.cfg
        if self.dist_b is not None:
            # Alternating sources: S1 from the configured input, S2 from the other one.
            s1 = self.clicks_a[sample_indices(self.dist_a, pairs, self.rng_a)]
            s2 = self.clicks_b[sample_indices(self.dist_b, pairs, self.rng_b)]
        elif cfg.pairing == CONSECUTIVE:
            draws = sample_indices(self.dist_a, 2 * pairs, self.rng_a).reshape(pairs, 2)
            s1, s2 = self.clicks_a[draws[:, 0]], self.clicks_a[draws[:, 1]]
        else:
            t = int(cfg.pairing_t)
            draws = sample_indices(self.dist_a, t * pairs, self.rng_a).reshape(pairs, t)
            # Two distinct sample sets per round, chosen uniformly at random.
            picks = self.rng_pairs.random((pairs, t)).argsort(axis=1)[:, :2]
            rows = np.arange(pairs)
            s1 = self.clicks_a[draws[rows, picks[:, 0]]]
            s2 = self.clicks_a[draws[rows, picks[:, 1]]]
        return s1, s2


def _emit(s1, s2, emission):
    differ = s1 != s2
    if emission == MODE_MAJOR:
        # Transposing groups each mode's codes over the whole batch.
        return s2.T[differ.T].astype(np.uint8), differ
    return s2[differ].astype(np.uint8), differ


def generate_bits(cfg, target_bits, dists=None):
    '''Runs the Von Neumann generator until ``target_bits`` bits exist.

    Args:
        cfg: GeneratorConfig
        target_bits: exact length of the returned stream
        dists: optional precomputed (dist_a, dist_b) for cfg
    '''
    target_bits = int(target_bits)
    if target_bits < 1:
        raise DomainError(f'target_bits must be positive, got {target_bits}.')
    dist_a, dist_b = dists if dists is not None else _distributions(cfg)
    source = _PairSource(cfg, dist_a, dist_b)
    modes = dist_a.modes

    chunks, produced, pairs_used, discard_streak = [], 0, 0, 0
    while produced < target_bits:
        s1, s2 = source.next_batch(PAIRS_PER_BATCH)
        bits, differ = _emit(s1, s2, cfg.emission)
        per_pair = differ.sum(axis=1)
        if cfg.emission == PAIR_MAJOR:
            cumulative = np.cumsum(per_pair)
            needed = target_bits - produced
            if cumulative[-1] >= needed:
                # Only the pairs up to the one that completes the stream are consumed.
                last = int(np.searchsorted(cumulative, needed))
                pairs_used += last + 1
                chunks.append(bits[:needed])
                produced = target_bits
                break
        pairs_used += PAIRS_PER_BATCH
        chunks.append(bits)
        produced += bits.size

        discard_streak = _update_streak(discard_streak, per_pair)
        if discard_streak >= NO_ENTROPY_BUDGET:
            raise NoEntropyError(
                f'{discard_streak} consecutive sample pairs were fully discarded; '
                f'the source for {cfg.input.ket()} carries no extractable entropy.')

    stream = np.concatenate(chunks)[:target_bits]
    meta = BitStreamMeta(
        unitary_id=dist_a.unitary_id,
        input_state=str(cfg.input),
        sample_pairs_consumed=pairs_used,
        seed=int(cfg.seed),
        modes=modes,
        pairing=cfg.pairing if cfg.pairing == CONSECUTIVE else f'{RANDOM_PAIR}_T{cfg.pairing_t}',
        emission=cfg.emission,
        alternate_input=None if cfg.alternate_input is None else str(cfg.alternate_input),
    )
    logger.info('Generated %d bits from %d sample pairs (%.3f bits/pair).',
                target_bits, pairs_used, target_bits / max(pairs_used, 1))
    return BitStream(stream, meta)


def _update_streak(streak, per_pair):
    productive = np.flatnonzero(per_pair)
    if productive.size == 0:
        return streak + per_pair.size
    return per_pair.size - 1 - int(productive[-1])


@dataclass(frozen=True)
class BiasReport:
    p0: float
    p1: float
    n: int
    z_score: float
    flagged: bool

    def to_dict(self):
        return dict(self.__dict__)


def bias_report(bits, sigmas=BIAS_SIGMAS):
    '''Empirical 0/1 frequencies; ``flagged`` when |p1 - 1/2| exceeds ``sigmas`` binomial sigmas.'''
    if isinstance(bits, str):
        bits = BitStream.from_string(bits)
    values = np.asarray(getattr(bits, 'bits', bits), dtype=np.uint8).ravel()
    n = int(values.size)
    if n == 0:
        raise DomainError('Cannot report the bias of an empty bit stream.')
    ones = int(values.sum())
    p1 = ones / n
    z = (p1 - 0.5) / (0.5 / np.sqrt(n))
    return BiasReport(p0=1.0 - p1, p1=p1, n=n, z_score=float(z), flagged=bool(abs(z) > sigmas))


def source_sweep(unitary, inputs, bits_per_input, seed, alternating=False,
                 postselect=False, emission=PAIR_MAJOR):
    '''p1 per input state (fixed source) or per ordered input pair (alternating source).

    In alternating mode row i pairs S1 from inputs[i] with S2 from
    inputs[(i + 1) % len(inputs)].
    '''
    inputs = [FockState(s) for s in inputs]
    if not inputs:
        raise DomainError('source_sweep needs at least one input state.')
    photons = {s.photons for s in inputs}
    if len(photons) != 1:
        raise DomainError(f'All inputs must share one photon number, got {sorted(photons)}.')
    if alternating and len(set(inputs)) < 2:
        raise DomainError('Alternating-source mode needs at least two distinct inputs.')
    U = build_unitary(unitary) if isinstance(unitary, MeshParameters) else unitary

    rows = []
    for i, state in enumerate(tqdm(inputs, desc='source sweep', disable=None)):
        other = inputs[(i + 1) % len(inputs)] if alternating else None
        cfg = GeneratorConfig(unitary=U, input=state, postselect_collision_free=postselect,
                              seed=seed, alternate_input=other, emission=emission)
        dists = _distributions(cfg)
        report = bias_report(generate_bits(cfg, bits_per_input, dists=dists))
        rows.append({
            'input': str(state),
            'alternate_input': None if other is None else str(other),
            'p1': report.p1,
            'expected_p1': expected_p1(*dists),
            'n': report.n,
            'z_score': report.z_score,
            'flagged': report.flagged,
        })
    return pd.DataFrame(rows, columns=['input', 'alternate_input', 'p1', 'expected_p1',
                                       'n', 'z_score', 'flagged'])


def rate_comparison(m, n, trials, seed):
    '''Mean retained bits per sampling pair: Boson sampling vs a branching-path source.

    Boson side: a Haar unitary drawn from ``seed`` with input |1..10..0>.
    Branching side: every pair of detections yields one fair raw bit, and raw
    bits go through the same Von Neumann pairing.
    '''
    if not m >= n >= 0 or m < 1:
        raise DomainError(f'Need m >= n >= 0 and m >= 1, got m = {m}, n = {n}.')
    if trials < 1:
        raise DomainError(f'trials must be positive, got {trials}.')
    U = haar_random_unitary(m, seed)
    dist = full_distribution(U, FockState.single_photons(m, n))
    source = _PairSource(GeneratorConfig(unitary=U, input=dist.input, seed=seed), dist)
    s1, s2 = source.next_batch(int(trials))
    boson_bits = float((s1 != s2).sum()) / trials

    raw = derive_rng(seed, STREAM_BRANCHING).integers(0, 2, size=int(trials), dtype=np.uint8)
    half = raw.size // 2
    branching_bits = float((raw[:2 * half:2] != raw[1:2 * half:2]).sum()) / trials
    return {'boson_bits_per_pair': boson_bits, 'branching_bits_per_pair': branching_bits}
