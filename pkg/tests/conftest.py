import numpy as np
import pytest

from mkdv_longtime.core import SpatialGrid
from mkdv_longtime.scattering import Potential, reflection_coefficient, sech_profile


def fine_potential(f, half_width=40.0, dx=0.01):
    return Potential.from_function(f, SpatialGrid.from_interval(-half_width, half_width, dx))


@pytest.fixture(scope="session")
def sech03():
    return fine_potential(sech_profile(0.3))


@pytest.fixture(scope="session")
def sech03_table(sech03):
    return reflection_coefficient(sech03, z_max=3.0, dz=0.005)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
