import pytest

from vkfem import (lshape_mesh, two_triangle_square, uniform_refine,
                   unit_square_mesh)


@pytest.fixture(scope="session")
def two_tri():
    return two_triangle_square()


@pytest.fixture(scope="session")
def square0():
    return unit_square_mesh()


@pytest.fixture(scope="session")
def square1(square0):
    return uniform_refine(square0)


@pytest.fixture(scope="session")
def square2(square1):
    return uniform_refine(square1)


@pytest.fixture(scope="session")
def lshape0():
    return lshape_mesh()


@pytest.fixture(scope="session")
def lshape1(lshape0):
    return uniform_refine(lshape0)


@pytest.fixture(scope="session")
def skewed_triangle():
    """One-element mesh with an irregular but well-shaped triangle."""
    from vkfem import build_topology
    return build_topology([(0.1, -0.05), (1.3, 0.2), (0.4, 0.9)], [(0, 1, 2)])
