import numpy as np
import pytest

from qatchain import Grid, LsodeSpec


@pytest.fixture
def ho1():
    return LsodeSpec(omega=1.0)


@pytest.fixture
def free():
    return LsodeSpec(omega=0.0)


@pytest.fixture
def grid():
    return Grid.symmetric(20.0, 1024)


def smooth_random_state(rng, grid, n_modes=4):
    """Normalized random superposition of displaced, chirped Gaussians."""
    x = grid.x
    psi = np.zeros_like(x, dtype=complex)
    for _ in range(n_modes):
        c = rng.normal() + 1j * rng.normal()
        x0, k0 = rng.uniform(-2, 2), rng.uniform(-1.5, 1.5)
        w = rng.uniform(0.6, 1.4)
        chirp = rng.uniform(-0.3, 0.3)
        psi += c * np.exp(-(x - x0) ** 2 / (2 * w * w) + 1j * k0 * x + 1j * chirp * x * x)
    psi /= np.sqrt(np.sum(np.abs(psi) ** 2) * grid.dx)
    return psi
