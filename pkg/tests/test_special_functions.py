"""The battery's special functions checked against direct quadrature."""

import math
import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import erfc, gammaincc
from scipy.stats import norm

POINTS = np.linspace(0.05, 4.0, 20)


@pytest.mark.parametrize('x', POINTS)
def test_erfc(x):
    tail, _ = quad(lambda t: math.exp(-t * t), x, np.inf)
    assert erfc(x) == pytest.approx(2.0 / math.sqrt(math.pi) * tail, rel=1e-8)


@pytest.mark.parametrize('a, x', [(a, x) for a, x in zip(
    [0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 5.0, 8.0, 16.0] * 2, np.linspace(0.1, 30.0, 20))])
def test_regularized_upper_incomplete_gamma(a, x):
    tail, _ = quad(lambda t: t ** (a - 1) * math.exp(-t), x, np.inf)
    assert gammaincc(a, x) == pytest.approx(tail / math.gamma(a), rel=1e-7, abs=1e-14)


@pytest.mark.parametrize('z', np.linspace(-4.0, 4.0, 20))
def test_normal_cdf(z):
    mass, _ = quad(lambda t: math.exp(-t * t / 2), -np.inf, z)
    assert norm.cdf(z) == pytest.approx(mass / math.sqrt(2 * math.pi), rel=1e-8)
