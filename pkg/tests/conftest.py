import numpy as np
import pytest

from wavekin.dispersion import DispersionRelation, KernelParams
from wavekin.mesh import build_uniform_grid
from wavekin.simulation import SimConfig

TEST_CASES = {
    "I": SimConfig(),
    "II": SimConfig(ic="bump"),
    "III": SimConfig(ic="monodisperse", omega_max=2.0, cells=20),
}

# rho = 2, sigma = gamma = 0: every kernel reduces to a closed form
PLAIN = KernelParams(c1=1.0, c2=1.0, sigma=0.0, gamma=0.0)
RHO2 = DispersionRelation(2.0)


@pytest.fixture
def worked_grid():
    return build_uniform_grid(1e-9, 2.0, 4)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
