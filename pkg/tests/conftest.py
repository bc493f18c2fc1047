import math

import numpy as np
import pytest

from multicone import MatrixTuple


def rot(theta):
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


@pytest.fixture(scope="session")
def positive_pair():
    return MatrixTuple([np.array([[2.0, 1.0], [1.0, 1.0]]),
                        np.array([[2.0, 1.0], [1.0, 2.0]])])


@pytest.fixture(scope="session")
def pair_with_identity():
    return MatrixTuple([np.array([[2.0, 1.0], [1.0, 1.0]]),
                        np.array([[2.0, 1.0], [1.0, 2.0]]),
                        np.eye(2)])


@pytest.fixture(scope="session")
def diagonal_swap_pair():
    return MatrixTuple([np.diag([1.0, 2.0]),
                        np.array([[0.0, 1.0], [1.0, 0.0]])])


@pytest.fixture(scope="session")
def triangular_mixed():
    return MatrixTuple([np.diag([2.0, 1.0]), np.diag([1.0, 3.0])])


@pytest.fixture(scope="session")
def diagonal_aligned():
    return MatrixTuple([np.diag([2.0, 1.0]), np.diag([3.0, 1.0])])


@pytest.fixture(scope="session")
def boundary_pair():
    # rot(theta) @ diag(2, 1/2) crosses the parabolic boundary at
    # cos(theta) = 0.8, i.e. theta ~ 0.6435011; this sits close enough
    # that the default budget cannot certify either way.
    theta = 0.6435
    return MatrixTuple([np.diag([2.0, 0.5]), rot(theta) @ np.diag([2.0, 0.5])])


def random_invertible(rng, scale=3.0):
    while True:
        m = rng.uniform(-scale, scale, size=(2, 2))
        if abs(np.linalg.det(m)) > 1e-3:
            return m
