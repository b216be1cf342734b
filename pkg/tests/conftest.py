"""
Pytest Configuration

Global fixtures and configuration for tests.
"""
import numpy as np
import pytest

from src.config import settings
from src.hilbert.spaces import FockGeometry, SpinGeometry, TensorGeometry
from src.models.params import ModelParams


@pytest.fixture
def rng():
    """Seeded generator; every test starts from the same stream."""
    return np.random.default_rng(settings.seed)


@pytest.fixture
def params():
    """Default model parameters."""
    return ModelParams()


@pytest.fixture
def fock_geo():
    """Fock space wide enough for the Gibbs fixed point at J = 0.5."""
    return FockGeometry(24)


@pytest.fixture
def small_fock():
    return FockGeometry(8)


@pytest.fixture
def spin_geo():
    return SpinGeometry(12)


@pytest.fixture
def tensor_geo():
    """Small H = G (x) F for matrix-free tensor tests."""
    return TensorGeometry(SpinGeometry(6), FockGeometry(6))


@pytest.fixture
def decoupling_geo():
    """Geometry on which the decoupling residual drops below 1e-7."""
    return TensorGeometry(SpinGeometry(16), FockGeometry(16))


def random_density(rng: np.random.Generator, dim: int, support: int) -> np.ndarray:
    """Random full-rank density matrix on the first ``support`` basis vectors."""
    g = rng.standard_normal((support, support)) + 1j * rng.standard_normal((support, support))
    rho = np.zeros((dim, dim), dtype=complex)
    rho[:support, :support] = g @ g.conj().T
    return rho / np.trace(rho).real


def core_density(rng: np.random.Generator, geo: TensorGeometry, radius: int = 1) -> np.ndarray:
    """Random density matrix on spin |m| <= radius and photons n <= radius."""
    keep = [geo.flat_index(m, n) for m in range(-radius, radius + 1) for n in range(radius + 1)]
    sub = random_density(rng, len(keep), len(keep))
    rho = np.zeros((geo.dim, geo.dim), dtype=complex)
    rho[np.ix_(keep, keep)] = sub
    return rho
