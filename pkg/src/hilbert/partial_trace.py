"""Partial traces over the factors of H = G (x) F."""
import numpy as np

from src.hilbert.spaces import DensityMatrix, TensorGeometry
from src.utils.errors import InvalidParameterError


def _legs(rho: DensityMatrix) -> np.ndarray:
    if not isinstance(rho.geometry, TensorGeometry):
        raise InvalidParameterError(f"partial trace needs a tensor geometry, got {rho.geometry}")
    return rho.matrix.reshape(rho.geometry.shape4)


def partial_trace_fock(rho: DensityMatrix) -> DensityMatrix:
    """Tr_F: the spin marginal."""
    return DensityMatrix(rho.geometry.spin, np.einsum("iaja->ij", _legs(rho)))


def partial_trace_spin(rho: DensityMatrix) -> DensityMatrix:
    """Tr_G: the oscillator marginal."""
    return DensityMatrix(rho.geometry.fock, np.einsum("aiaj->ij", _legs(rho)))


__all__ = ["partial_trace_fock", "partial_trace_spin"]
