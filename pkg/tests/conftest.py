import numpy as np
import pytest

from zenolab.inversion import spectral_density
from zenolab.oracles import BruteForceSurvival
from zenolab.resolvent import FormFactor, find_pole


@pytest.fixture(scope="session")
def flat_ff():
    return FormFactor.flat_interval(0.01, 0.0, 1.0)


@pytest.fixture(scope="session")
def reference(flat_ff):
    pole = find_pole(flat_ff, 0.5)
    sd = spectral_density(flat_ff, 0.5)
    return flat_ff, pole, sd


@pytest.fixture(scope="session")
def brute_force(flat_ff):
    return BruteForceSurvival(flat_ff, 0.5, 4000)


def random_hermitian(seed, dim):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (a + a.conj().T) / 2
