import math

import numpy as np
import pytest

from conescale import Grid, Ray, RayFunction, TIME, TransformContext


@pytest.fixture(scope="session")
def grid4096():
    return Grid(20.0, 4096)


@pytest.fixture(scope="session")
def ctx4096(grid4096):
    return TransformContext(0.0, 0j, 0j, grid4096)


@pytest.fixture(scope="session")
def real_ray():
    return Ray(0.0, 0j, TIME)


def gaussian_on(grid, ray=None, order=0.0, number=0j, width=math.sqrt(2.0)):
    """exp(-t^2/2) by default (width sqrt(2) in the exp(-(t/w)^2) convention)."""
    ray = Ray(0.0, 0j, TIME) if ray is None else ray
    z = ray.points(grid.nodes)
    return RayFunction(ray, grid, np.exp(-((z / width) ** 2)), order, number)


@pytest.fixture(scope="session")
def gauss4096(grid4096, real_ray):
    return gaussian_on(grid4096, real_ray)


@pytest.fixture(scope="session")
def one_sided4096(grid4096, real_ray):
    t = grid4096.nodes
    vals = np.where(t < 0.0, np.exp(t), 0.0).astype(complex)
    return RayFunction(real_ray, grid4096, vals)
