"""
Shared fixtures for the test suite.
"""
import numpy as np
import pytest

from lib.closures import MixtureConfig, build_gaussian, build_maxwellian
from lib.collision import MixtureState
from lib.sym3 import SymTensor3
from lib.vgrid import build_grid


def random_spd(rng: np.random.Generator, low: float = 0.3, high: float = 3.0) -> SymTensor3:
    """Random SPD tensor with eigenvalues drawn from [low, high]."""
    q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    values = rng.uniform(low, high, size=3)
    return SymTensor3.from_matrix(q @ np.diag(values) @ q.T)


def maxwellian_state(grid, n1=1.0, u1=(0, 0, 0), T1=1.0, n2=1.0, u2=(0, 0, 0), T2=1.0,
                     m1=1.0, m2=1.0) -> MixtureState:
    f1 = build_maxwellian(n1, u1, T1, m1, grid, mass_exact=True)
    f2 = build_maxwellian(n2, u2, T2, m2, grid, mass_exact=True)
    return MixtureState(grid, f1, f2, m1, m2)


def random_state(rng: np.random.Generator, grid, m1: float = 1.0, m2: float = 1.0) -> MixtureState:
    """
    Non-equilibrium state: species 1 an anisotropic Gaussian, species 2 a
    sum of two Maxwellians, temperatures kept where the grid resolves them.
    """
    tensor = random_spd(rng, 0.8, 1.4).scaled(m1)
    f1 = build_gaussian(rng.uniform(0.5, 1.5), rng.uniform(-0.4, 0.4, size=3), tensor, m1, grid, True)
    f2 = (build_maxwellian(rng.uniform(0.3, 0.8), rng.uniform(-0.4, 0.4, size=3),
                           rng.uniform(0.8, 1.3) * m2, m2, grid, True)
          + build_maxwellian(rng.uniform(0.3, 0.8), rng.uniform(-0.4, 0.4, size=3),
                             rng.uniform(0.8, 1.3) * m2, m2, grid, True))
    return MixtureState(grid, f1, f2, m1, m2)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope='session')
def grid():
    """V = 10, N = 31: resolves Gaussians with per-axis variance in [0.7, 1.5]."""
    return build_grid(10.0, 31)


@pytest.fixture(scope='session')
def fine_grid():
    """V = 8, N = 33 (h = 0.5)."""
    return build_grid(8.0, 33)


@pytest.fixture(scope='session')
def wide_grid():
    """V = 12, N = 41, for variances up to 3."""
    return build_grid(12.0, 41)


@pytest.fixture(scope='session')
def coarse_grid():
    """Cheap grid for trajectory tests that do not need quadrature accuracy."""
    return build_grid(8.0, 21)


@pytest.fixture
def default_config():
    return MixtureConfig()
