import logging
from dataclasses import dataclass
from typing import List
import numpy as np
import pandas as pd
from scipy.special import logsumexp
from scipy.stats import entropy as scipy_entropy
from tqdm import tqdm

from src.optics.fock import full_distribution, FockState
from src.optics.interferometer import build_unitary, with_angle, mzi_cell_index, TWO_PI
from src.utils.errors import DomainError, NumericalIntegrityError

logger = logging.getLogger(__name__)

NORMALIZATION_TOL = 1e-9
DEFAULT_GRID = 128
# Angles swept in the prototype study, in its plotting order.
PROTOTYPE_SWEEP_LABELS = ('2I', '1I', '1E', '4I', '3I', '3E', '6I', '5I', '5E', '8I')


def _probabilities(dist):
    p = np.asarray(getattr(dist, 'probabilities', dist), dtype=np.float64).ravel()
    if p.size == 0 or np.any(p < 0) or abs(p.sum() - 1.0) > NORMALIZATION_TOL:
        raise NumericalIntegrityError(
            f'Entropy needs a normalized distribution (sum = {p.sum():.12g}, min = {p.min() if p.size else float("nan"):.3g}).')
    return p


def shannon_entropy(dist):
    p = _probabilities(dist)
    # scipy drops p = 0 terms (0 log 0 = 0).
    return float(scipy_entropy(p, base=2))


def renyi_entropy(dist, beta):
    if beta <= 0:
        raise DomainError(f'Renyi order must be positive, got {beta}.')
    if beta == 1:
        raise DomainError('Renyi order 1 is the Shannon entropy; use shannon_entropy.')
    p = _probabilities(dist)
    p = p[p > 0]
    # log-sum-exp keeps sum(p^beta) finite for large orders.
    return float(logsumexp(beta * np.log(p)) / np.log(2) / (1.0 - beta))


def min_entropy(dist):
    return float(-np.log2(_probabilities(dist).max()))


@dataclass(frozen=True)
class EntropyCurve:
    parameter_label: str
    angles: List[float]
    shannon: List[float]
    min_entropy: List[float]

    def __post_init__(self):
        if not len(self.angles) == len(self.shannon) == len(self.min_entropy):
            raise DomainError('Entropy curve lists must have equal length.')

    @property
    def shannon_variance(self):
        return float(np.var(self.shannon))

    def to_frame(self):
        return pd.DataFrame({
            'angle_rad': self.angles,
            'shannon_bits': self.shannon,
            'min_entropy_bits': self.min_entropy,
        })


def entropy_at(base, label, angle, input_state):
    dist = full_distribution(build_unitary(with_angle(base, label, angle)), input_state)
    return shannon_entropy(dist), min_entropy(dist)


def sweep_angles(grid_points):
    if grid_points < 1:
        raise DomainError(f'grid_points must be positive, got {grid_points}.')
    # Half-open [0, 2pi): the endpoint repeats angle 0.
    return [TWO_PI * k / grid_points for k in range(grid_points)]


def parameter_sweep(base, labels, input_state, grid_points=DEFAULT_GRID):
    input_state = FockState(input_state)
    for label in labels:
        mzi_cell_index(label, base.modes)
    angles = sweep_angles(grid_points)
    curves = []
    for label in tqdm(labels, desc='parameter sweep', disable=None):
        shannon, h_min = [], []
        for angle in angles:
            s, m = entropy_at(base, label, angle, input_state)
            shannon.append(s)
            h_min.append(m)
        curves.append(EntropyCurve(str(label), list(angles), shannon, h_min))
        logger.info('Swept theta_%s: Shannon %.4f..%.4f bits, min-entropy %.4f..%.4f bits.',
                    label, min(shannon), max(shannon), min(h_min), max(h_min))
    return curves


def rank_labels_by_variance(curves):
    '''Labels ordered by how strongly their angle moves the Shannon entropy.'''
    ranked = sorted(curves, key=lambda c: c.shannon_variance, reverse=True)
    return [(c.parameter_label, c.shannon_variance) for c in ranked]


def save_curve_csv(curve, f_path):
    curve.to_frame().to_csv(f_path, index=False, float_format='%.17g')
