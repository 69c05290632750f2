import numpy as np
import pytest

from kguniform import KgState, field_from_values, make_grid


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def grid64():
    return make_grid(1, 64)


def random_real_state(grid, rng, scale=0.3):
    """Random smooth real-valued (z, z_t) pair."""
    n = grid.n_points
    x = grid.x

    def smooth():
        out = np.zeros(n)
        for k in range(1, 6):
            out += rng.standard_normal() * np.cos(k * x) + rng.standard_normal() * np.sin(k * x)
        return scale * out / 5.0

    return KgState(
        z=field_from_values(grid, smooth()),
        zt=field_from_values(grid, smooth()),
        t=0.0,
    )
