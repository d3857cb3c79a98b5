"""Shared fixtures: small procedural meshes reused across test modules.

Session scope keeps the geometry generators from re-running per test; the
meshes themselves are immutable, so sharing is safe.
"""

import numpy as np
import pytest

from meshmark import corpus
from meshmark.mesh import Mesh


@pytest.fixture(scope="session")
def small_sphere():
    """Bumpy sphere at 642 vertices; carries the default payload."""
    return corpus.bumpy_sphere(subdivisions=3)


@pytest.fixture(scope="session")
def small_torus():
    return corpus.torus(major_segments=40, minor_segments=32)


@pytest.fixture(scope="session")
def small_disk():
    return corpus.bumpy_disk(rings=16)


@pytest.fixture(scope="session")
def grid():
    return corpus.flat_grid()


@pytest.fixture(scope="session")
def icosphere2():
    return corpus.icosphere(subdivisions=2)


@pytest.fixture()
def single_triangle():
    return Mesh(
        np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]),
        np.array([[0, 1, 2]]),
    )


@pytest.fixture()
def tetrahedron():
    v = np.array(
        [[1.0, 1.0, 1.0], [1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]]
    )
    f = np.array([[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]])
    return Mesh(v, f)
