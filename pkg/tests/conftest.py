import functools

import numpy as np
import pytest

from hodlrkit import GridSpec, grid_front


@functools.lru_cache(maxsize=None)
def cached_front(dims, axis, plane, stencil="laplacian"):
    """Fronts are deterministic, so share them across tests."""
    return grid_front(GridSpec(dims, stencil=stencil), axis, plane)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_low_rank(rng, m, n, r):
    """Exactly rank-r matrix with generic Gaussian factors."""
    return rng.standard_normal((m, r)) @ rng.standard_normal((r, n))
