import numpy as np
import pytest

from fluorspec.model import ModelParams

USUAL = ModelParams(gamma=0.6, omega2=28.0, z=0.0, y=0.0)
MODIFIED = ModelParams(gamma=0.6, omega2=28.0, z=0.0, y=0.0,
                       delta_plus=-0.03, delta_minus=0.13,
                       g_plus_norm2=0.0045, g_minus_norm2=0.0055,
                       g_inner=complex(-0.004, 0.002), epsilon=-0.001)

GROUND = np.array([[0.0, 0.0], [0.0, 1.0]], dtype=complex)


@pytest.fixture
def usual():
    return USUAL


@pytest.fixture
def modified():
    return MODIFIED


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)
