"""Shared measures and parameter sets."""
import pytest

from src.kinetics.tumbling import KineticParams
from src.measures.velocity_measure import DensitySpec, make_discrete, quadrature


@pytest.fixture
def two_velocity():
    return make_discrete([-1.0, 1.0], [0.5, 0.5])


@pytest.fixture
def four_velocity():
    """{-1, -0.5, 0.5, 1} with uniform weights."""
    return make_discrete([-1.0, -0.5, 0.5, 1.0], [0.25] * 4)


@pytest.fixture
def moderate_params():
    return KineticParams(chi_s=0.3, chi_n=0.1)


@pytest.fixture
def strong_params():
    return KineticParams(chi_s=0.48, chi_n=0.44)


@pytest.fixture
def uniform64():
    return quadrature(DensitySpec('uniform'), 64)
