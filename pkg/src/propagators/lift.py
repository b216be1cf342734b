"""
Factor Lifting

Act with a single-factor map on one leg pair of a tensor-space operator on
H = G (x) F: Fock channels on the Fock legs, spin shifts on the spin legs.
"""
from typing import Callable, Sequence

import numpy as np

from src.hilbert.spaces import FockGeometry, SpinScheme, TensorGeometry, basis_matrix
from src.superop.algebra import as_matrix
from src.utils.errors import InvalidParameterError

FockMap = Callable[[np.ndarray], np.ndarray]


def fock_transfer_tensor(fmap: FockMap, geo: FockGeometry) -> np.ndarray:
    """T[a, b, c, d] = fmap(|c⟩⟨d|)[a, b]."""
    dim = geo.dim
    tensor = np.empty((dim, dim, dim, dim), dtype=complex)
    for c in range(dim):
        for d in range(dim):
            tensor[:, :, c, d] = fmap(basis_matrix(geo, c, d))
    return tensor


def lift_fock_map(fmap: FockMap, rho: np.ndarray, geo: TensorGeometry) -> np.ndarray:
    """
    (1 ⊗ fmap)(ρ) for a linear map on Fock-space matrices.

    Args:
        fmap: Linear map on dim(F) x dim(F) matrices
        rho: Tensor-space operator in spin-major order
        geo: Tensor geometry

    Returns:
        The lifted image, same shape as ``rho``
    """
    rho = as_matrix(rho)
    if rho.shape != (geo.dim, geo.dim):
        raise InvalidParameterError(f"operator shape {rho.shape} does not match {geo}")
    transfer = fock_transfer_tensor(fmap, geo.fock)
    out = np.einsum("abcd,icjd->iajb", transfer, rho.reshape(geo.shape4))
    return out.reshape(geo.dim, geo.dim)


def shift_legs(x: np.ndarray, k: int, axes: Sequence[int], scheme: SpinScheme) -> np.ndarray:
    """
    out[..i..j..] = x[..i+k..j+k..] along ``axes``, i.e. l₋ᵏ X l₊ᵏ on those legs.

    Negative k shifts the other way. The hard scheme drops what leaves the
    window; the cyclic scheme wraps it around.
    """
    if scheme is SpinScheme.CYCLIC:
        return np.roll(x, shift=(-k,) * len(axes), axis=tuple(axes))
    out = np.zeros_like(x)
    n = x.shape[axes[0]]
    if abs(k) >= n:
        return out
    target, source = [slice(None)] * x.ndim, [slice(None)] * x.ndim
    for axis in axes:
        target[axis] = slice(max(0, -k), n - max(0, k))
        source[axis] = slice(max(0, k), n - max(0, -k))
    out[tuple(target)] = x[tuple(source)]
    return out


__all__ = ["FockMap", "fock_transfer_tensor", "lift_fock_map", "shift_legs"]
