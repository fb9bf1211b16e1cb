import numpy as np
import pytest

from multisymp import area_lagrangian, ellipsoid_lagrangian, graph_lift, minimal_surface_density


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)


@pytest.fixture
def x3():
    return np.zeros(3)


@pytest.fixture
def area3():
    return area_lagrangian(3, 2)


@pytest.fixture
def ellipsoid3():
    return ellipsoid_lagrangian(3, 2, [1.0, 4.0, 9.0])


@pytest.fixture
def minimal_lift3():
    return graph_lift(minimal_surface_density(3, 2))
