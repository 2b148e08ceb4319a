import warnings

import numpy as np
import pytest

from excitonkerr.analytic import PerturbativeRangeWarning
from excitonkerr.params import InitialAmplitudes, SystemParams


@pytest.fixture
def cds():
    return SystemParams.cds()


@pytest.fixture
def amps():
    return InitialAmplitudes(alpha=2.0, beta_mag=1.0, phi=0.0)


@pytest.fixture(autouse=True)
def _quiet_range_warning():
    # the CdS window deliberately extends past chi t = 1
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", PerturbativeRangeWarning)
        yield


def random_density(dim, seed=0, rank=None):
    rng = np.random.default_rng(seed)
    rank = rank or dim
    x = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = x @ x.conj().T
    return rho / np.trace(rho).real
