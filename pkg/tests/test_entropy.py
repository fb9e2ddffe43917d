import math
import numpy as np
import pandas as pd
import pytest
from hypothesis import given, strategies as st

from src.analysis.entropy import (
    PROTOTYPE_SWEEP_LABELS, EntropyCurve, entropy_at, min_entropy, parameter_sweep,
    rank_labels_by_variance, renyi_entropy, save_curve_csv, shannon_entropy, sweep_angles,
)
from src.optics.fock import full_distribution
from src.optics.interferometer import TWO_PI, build_unitary, get_angle
from src.utils.errors import DomainError, MeshLabelError, NumericalIntegrityError
from src.utils.utils import derive_rng

from .conftest import INPUT_11000

probability_vectors = st.lists(st.floats(0.0, 1.0), min_size=1, max_size=40).filter(
    lambda v: sum(v) > 1e-3).map(lambda v: np.array(v) / np.sum(v))


def random_distributions(count=200):
    rng = derive_rng(99)
    return [rng.dirichlet(np.full(k, a)) for k, a in
            zip(rng.integers(2, 60, size=count), rng.uniform(0.05, 3.0, size=count))]


def test_uniform_fifteen_states():
    p = np.full(15, 1 / 15)
    assert shannon_entropy(p) == pytest.approx(math.log2(15), abs=1e-12)
    assert min_entropy(p) == pytest.approx(math.log2(15), abs=1e-12)
    for beta in (0.5, 2, 7, 100):
        assert renyi_entropy(p, beta) == pytest.approx(math.log2(15), abs=1e-12)


def test_point_mass():
    p = np.array([0.0, 1.0, 0.0])
    assert shannon_entropy(p) == 0.0
    assert min_entropy(p) == 0.0


def test_small_examples():
    assert min_entropy(np.array([0.5, 0.25, 0.25])) == pytest.approx(1.0)
    assert renyi_entropy(np.array([0.5, 0.5]), 2) == pytest.approx(1.0)


def test_paper_u5_entropy_against_direct_sum(u5_dist):
    p = u5_dist.probabilities
    direct = -sum(x * math.log2(x) for x in p if x > 0)
    value = shannon_entropy(u5_dist)
    assert value == pytest.approx(direct, abs=1e-12)
    assert 0.0 < value < math.log2(15)


def test_high_order_renyi_approaches_min_entropy(u5_dist):
    h_min = min_entropy(u5_dist)
    assert h_min == pytest.approx(-math.log2(0.2199), abs=0.02)
    # H_beta - H_min lies in [0, H_min / (beta - 1)].
    gap = renyi_entropy(u5_dist, 100) - h_min
    assert -1e-12 <= gap <= h_min / 99 + 1e-12
    assert abs(renyi_entropy(u5_dist, 1000) - h_min) <= 0.01


def test_entropy_ordering_on_random_distributions():
    for p in random_distributions():
        h_min, h_2, h = min_entropy(p), renyi_entropy(p, 2), shannon_entropy(p)
        assert h_min <= h_2 + 1e-12
        assert h_2 <= h + 1e-12
        gap = renyi_entropy(p, 100) - h_min
        assert -1e-12 <= gap <= h_min / 99 + 1e-12
        assert abs(renyi_entropy(p, 1000) - h_min) <= 0.01
        assert 0.0 <= h <= math.log2(len(p)) + 1e-12


@given(probability_vectors)
def test_renyi_tends_to_shannon_near_order_one(p):
    h = shannon_entropy(p)
    assert abs(renyi_entropy(p, 1 - 1e-4) - h) <= 1e-3
    assert abs(renyi_entropy(p, 1 + 1e-4) - h) <= 1e-3


@pytest.mark.parametrize('beta', [0, -1, 1])
def test_invalid_renyi_order(beta):
    with pytest.raises(DomainError):
        renyi_entropy(np.array([0.5, 0.5]), beta)


def test_unnormalized_input():
    with pytest.raises(NumericalIntegrityError):
        shannon_entropy(np.array([0.5, 0.4]))
    with pytest.raises(NumericalIntegrityError):
        min_entropy(np.array([1.2, -0.2]))


def test_sweep_grid_is_half_open():
    angles = sweep_angles(128)
    assert len(angles) == 128
    assert angles[0] == 0.0
    assert angles[-1] < TWO_PI
    assert sweep_angles(1) == [0.0]


def test_single_label_sweep(reck_mesh):
    (curve,) = parameter_sweep(reck_mesh, ['1I'], INPUT_11000, grid_points=128)
    assert curve.parameter_label == '1I'
    assert len(curve.angles) == len(curve.shannon) == len(curve.min_entropy) == 128
    assert all(m <= s + 1e-12 for m, s in zip(curve.min_entropy, curve.shannon))


def test_sweep_is_periodic(reck_mesh):
    (curve,) = parameter_sweep(reck_mesh, ['3E'], INPUT_11000, grid_points=16)
    wrapped = entropy_at(reck_mesh, '3E', TWO_PI, INPUT_11000)
    assert wrapped[0] == pytest.approx(curve.shannon[0], abs=1e-9)
    assert wrapped[1] == pytest.approx(curve.min_entropy[0], abs=1e-9)


def test_sweep_at_base_angle_matches_base_mesh(reck_mesh):
    angle = get_angle(reck_mesh, '5I')
    base = full_distribution(build_unitary(reck_mesh), INPUT_11000)
    assert entropy_at(reck_mesh, '5I', angle, INPUT_11000)[0] == pytest.approx(
        shannon_entropy(base), abs=1e-12)


@pytest.mark.slow
def test_prototype_labels_give_non_constant_curves(reck_mesh):
    curves = parameter_sweep(reck_mesh, PROTOTYPE_SWEEP_LABELS, INPUT_11000, grid_points=128)
    assert len(curves) == 10
    for curve in curves:
        assert np.ptp(curve.shannon) > 1e-6
        assert all(m <= s + 1e-12 for m, s in zip(curve.min_entropy, curve.shannon))


def test_prototype_labels_vary_entropy_on_coarse_grid(reck_mesh):
    curves = parameter_sweep(reck_mesh, PROTOTYPE_SWEEP_LABELS, INPUT_11000, grid_points=8)
    assert [c.parameter_label for c in curves] == list(PROTOTYPE_SWEEP_LABELS)
    assert all(np.ptp(c.shannon) > 1e-6 for c in curves)


def test_unknown_label_rejected_before_sweeping(reck_mesh):
    with pytest.raises(MeshLabelError):
        parameter_sweep(reck_mesh, ['1I', '99I'], INPUT_11000, grid_points=4)


def test_variance_ranking():
    flat = EntropyCurve('1E', [0.0, 1.0], [1.0, 1.0], [0.5, 0.5])
    wavy = EntropyCurve('1I', [0.0, 1.0], [0.5, 1.5], [0.2, 0.4])
    ranking = rank_labels_by_variance([flat, wavy])
    assert [label for label, _ in ranking] == ['1I', '1E']
    assert ranking[1][1] == 0.0


def test_curve_lists_must_align():
    with pytest.raises(DomainError):
        EntropyCurve('1I', [0.0], [1.0, 2.0], [0.5])


def test_curve_csv(tmp_path):
    curve = EntropyCurve('2I', [0.0, 0.5], [1.25, 1.5], [1.0, 1.125])
    path = tmp_path / 'curve.csv'
    save_curve_csv(curve, path)
    frame = pd.read_csv(path)
    assert list(frame.columns) == ['angle_rad', 'shannon_bits', 'min_entropy_bits']
    assert frame['shannon_bits'].tolist() == [1.25, 1.5]
