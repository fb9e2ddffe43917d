import os
import pytest
import hypothesis
import numpy as np

from src.linalg.matrices import haar_random_unitary
from src.optics.fock import full_distribution
from src.optics.interferometer import paper_u5, load_mesh
from src.qrng.pipeline import GeneratorConfig, MODE_MAJOR, PAIR_MAJOR, generate_bits

np.seterr(all="warn")

hypothesis.settings.register_profile("fast", max_examples=5, deadline=None)
hypothesis.settings.register_profile("ci", max_examples=50, deadline=None)
hypothesis.settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "ci"))

REPO_ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), '..'))
CONFIG_DIR = os.path.join(REPO_ROOT, 'config')
INPUT_11000 = (1, 1, 0, 0, 0)


@pytest.fixture(scope='session')
def u5():
    return paper_u5()


@pytest.fixture(scope='session')
def u5_dist(u5):
    return full_distribution(u5, INPUT_11000)


@pytest.fixture(scope='session')
def reck_mesh():
    return load_mesh(os.path.join(CONFIG_DIR, 'meshes', 'reck_5mode.json'))


@pytest.fixture(scope='session')
def haar_unitaries():
    '''Twenty seeded Haar unitaries per (modes, photons) case.'''
    return {m: [haar_random_unitary(m, seed) for seed in range(20)] for m in (5, 8, 10)}


@pytest.fixture(scope='session')
def pair_major_stream(u5):
    cfg = GeneratorConfig(unitary=u5, input=INPUT_11000, seed=2024, emission=PAIR_MAJOR)
    return generate_bits(cfg, 10**6)


@pytest.fixture(scope='session')
def mode_major_stream(u5):
    cfg = GeneratorConfig(unitary=u5, input=INPUT_11000, seed=2024, emission=MODE_MAJOR)
    return generate_bits(cfg, 10**6)


@pytest.fixture
def exp_base(tmp_path):
    return str(tmp_path / 'experiments')
