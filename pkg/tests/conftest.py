import numpy as np
import pytest

from weldfcs import Numerics, TemperatureProfile, VolumeContext


@pytest.fixture(scope="session")
def kink():
    """Default kink: beta 2 -> 1 over [-1, 1]."""
    return TemperatureProfile(2.0, 1.0, center=0.0, half_width=1.0)


@pytest.fixture(scope="session")
def box(kink):
    return VolumeContext(kink, 40.0, 1.0)


@pytest.fixture(scope="session")
def lean_numerics():
    """Validated fast settings used across the unit tests."""
    return Numerics(n_modes=256, tail_tol=2e-3, s_nodes=6, dx=0.02,
                    window_pad_gamma=6.0, window_factor=4.0, p_max_gamma=33.0)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)
