"""Shared fixtures and random-field helpers for the test suite."""

import numpy as np
import pytest

from tfmhd.grid import ScalarField, VectorField2, dealias, leray_project, make_grid


@pytest.fixture
def grid16():
    return make_grid(16)


@pytest.fixture
def grid32():
    return make_grid(32)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_scalar(rng, grid, scale=1.0):
    """Random real scalar field truncated to the dealias band."""
    return dealias(ScalarField.from_samples(grid, scale * rng.standard_normal(grid.shape)))


def random_vector(rng, grid, scale=1.0):
    return VectorField2(random_scalar(rng, grid, scale), random_scalar(rng, grid, scale))


def random_solenoidal(rng, grid, scale=1.0):
    return leray_project(random_vector(rng, grid, scale))
