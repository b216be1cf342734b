"""
Truncated Spaces and Canonical Operators

Fock space F (single bosonic mode, occupations 0..cutoff), the shift-operator
spin space G (basis |n) for -halfwidth <= n <= halfwidth) and their tensor
product H = G (x) F in spin-major ordering.
"""
import logging
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Optional, Tuple, Union

import numpy as np

from src.utils.errors import InvalidParameterError

logger = logging.getLogger(__name__)


class SpinScheme(str, Enum):
    """How the spin shift operators treat the truncation boundary."""

    HARD = "hard"  # escaping shift maps to zero; keeps [M, l±] = ±l±
    CYCLIC = "cyclic"  # shift wraps around; keeps l₊l₋ = l₋l₊ = 1


@dataclass(frozen=True)
class FockGeometry:
    """Fock space truncated at occupation ``cutoff``."""

    cutoff: int

    def __post_init__(self):
        if int(self.cutoff) != self.cutoff or self.cutoff < 1:
            raise InvalidParameterError(f"Fock cutoff must be an integer >= 1, got {self.cutoff}")

    @property
    def dim(self) -> int:
        return self.cutoff + 1

    def index(self, n: int) -> int:
        if not 0 <= n <= self.cutoff:
            raise InvalidParameterError(f"occupation {n} outside 0..{self.cutoff}")
        return n


@dataclass(frozen=True)
class SpinGeometry:
    """Spin space with basis |-halfwidth) ... |halfwidth)."""

    halfwidth: int
    scheme: SpinScheme = SpinScheme.HARD

    def __post_init__(self):
        if int(self.halfwidth) != self.halfwidth or self.halfwidth < 1:
            raise InvalidParameterError(f"spin halfwidth must be an integer >= 1, got {self.halfwidth}")
        object.__setattr__(self, "scheme", SpinScheme(self.scheme))

    @property
    def dim(self) -> int:
        return 2 * self.halfwidth + 1

    @property
    def values(self) -> np.ndarray:
        """Eigenvalues of M in index order."""
        return np.arange(-self.halfwidth, self.halfwidth + 1)

    def index(self, n: int) -> int:
        if abs(n) > self.halfwidth:
            raise InvalidParameterError(f"spin label {n} outside -{self.halfwidth}..{self.halfwidth}")
        return n + self.halfwidth


@dataclass(frozen=True)
class TensorGeometry:
    """H = G (x) F with flat index spin_index * dim(F) + fock_index."""

    spin: SpinGeometry
    fock: FockGeometry

    @property
    def dim(self) -> int:
        return self.spin.dim * self.fock.dim

    @property
    def shape4(self) -> Tuple[int, int, int, int]:
        """Shape of an operator reshaped to (spin, fock, spin, fock) legs."""
        return (self.spin.dim, self.fock.dim, self.spin.dim, self.fock.dim)

    def flat_index(self, m: int, n: int) -> int:
        """The single index map used for every tensor-space basis vector."""
        return self.spin.index(m) * self.fock.dim + self.fock.index(n)


Geometry = Union[FockGeometry, SpinGeometry, TensorGeometry]


def _frozen_matrix(matrix, dim: int) -> np.ndarray:
    array = np.array(matrix, dtype=complex)
    if array.shape != (dim, dim):
        raise InvalidParameterError(f"expected a {dim}x{dim} matrix, got shape {array.shape}")
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class Operator:
    """Dense complex matrix tagged with the geometry it acts on."""

    geometry: Geometry
    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "matrix", _frozen_matrix(self.matrix, self.geometry.dim))

    @property
    def dim(self) -> int:
        return self.geometry.dim

    def dag(self) -> "Operator":
        return Operator(self.geometry, self.matrix.conj().T)

    def _other(self, other: "Operator") -> np.ndarray:
        if other.geometry != self.geometry:
            raise InvalidParameterError(f"geometry mismatch: {self.geometry} vs {other.geometry}")
        return other.matrix

    def __matmul__(self, other: "Operator") -> "Operator":
        return Operator(self.geometry, self.matrix @ self._other(other))

    def __add__(self, other: "Operator") -> "Operator":
        return Operator(self.geometry, self.matrix + self._other(other))

    def __sub__(self, other: "Operator") -> "Operator":
        return Operator(self.geometry, self.matrix - self._other(other))

    def __mul__(self, scalar: complex) -> "Operator":
        return Operator(self.geometry, scalar * self.matrix)

    __rmul__ = __mul__

    def __neg__(self) -> "Operator":
        return Operator(self.geometry, -self.matrix)

    def commutator(self, other: "Operator") -> "Operator":
        rhs = self._other(other)
        return Operator(self.geometry, self.matrix @ rhs - rhs @ self.matrix)

    def anticommutator(self, other: "Operator") -> "Operator":
        rhs = self._other(other)
        return Operator(self.geometry, self.matrix @ rhs + rhs @ self.matrix)

    @classmethod
    def identity(cls, geometry: Geometry) -> "Operator":
        return cls(geometry, np.eye(geometry.dim))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A state on a truncated space.

    Construction does not validate; ``src.numerics.check_density`` does.
    """

    geometry: Geometry
    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "matrix", _frozen_matrix(self.matrix, self.geometry.dim))

    @property
    def trace(self) -> complex:
        return complex(np.trace(self.matrix))


@lru_cache(maxsize=32)
def build_fock(cutoff: int) -> Tuple[FockGeometry, Operator, Operator, Operator]:
    """
    Build the truncated Fock space and its ladder operators.

    Args:
        cutoff: Largest occupation number kept

    Returns:
        (geometry, a, adag, n_op) with adag|cutoff> = 0
    """
    geo = FockGeometry(cutoff)
    lowering = np.diag(np.sqrt(np.arange(1, cutoff + 1, dtype=float)), k=1)
    a = Operator(geo, lowering)
    return geo, a, a.dag(), Operator(geo, np.diag(np.arange(cutoff + 1, dtype=float)))


@lru_cache(maxsize=32)
def build_spin(halfwidth: int, scheme: SpinScheme = SpinScheme.HARD) -> Tuple[SpinGeometry, Operator, Operator, Operator]:
    """
    Build the truncated spin space with shift operators l± and M.

    Args:
        halfwidth: Largest |n| kept
        scheme: Boundary treatment of the shifts

    Returns:
        (geometry, l_plus, l_minus, m_op)
    """
    geo = SpinGeometry(halfwidth, scheme)
    raising = np.eye(geo.dim, k=-1)
    if geo.scheme is SpinScheme.CYCLIC:
        raising[0, geo.dim - 1] = 1.0
    l_plus = Operator(geo, raising)
    return geo, l_plus, l_plus.dag(), Operator(geo, np.diag(geo.values.astype(float)))


def tensor_embed(spin_op: Optional[Operator], fock_op: Optional[Operator], geo: TensorGeometry) -> Operator:
    """Kronecker product in spin-major order; ``None`` stands for the identity factor."""
    spin_matrix = np.eye(geo.spin.dim) if spin_op is None else spin_op.matrix
    fock_matrix = np.eye(geo.fock.dim) if fock_op is None else fock_op.matrix
    if spin_matrix.shape != (geo.spin.dim,) * 2 or fock_matrix.shape != (geo.fock.dim,) * 2:
        raise InvalidParameterError(
            f"factor shapes {spin_matrix.shape} x {fock_matrix.shape} do not match {geo}"
        )
    return Operator(geo, np.kron(spin_matrix, fock_matrix))


def default_margins(geo: Geometry) -> Tuple[int, int]:
    """Default (spin, fock) margins: a quarter of each truncation width."""
    spin, fock = _factors(geo)
    return (spin.halfwidth // 4 if spin else 0, fock.cutoff // 4 if fock else 0)


def _factors(geo: Geometry) -> Tuple[Optional[SpinGeometry], Optional[FockGeometry]]:
    if isinstance(geo, TensorGeometry):
        return geo.spin, geo.fock
    if isinstance(geo, SpinGeometry):
        return geo, None
    if isinstance(geo, FockGeometry):
        return None, geo
    raise InvalidParameterError(f"unknown geometry {geo!r}")


def interior_mask(geo: Geometry, margin_spin: int = 0, margin_fock: int = 0) -> np.ndarray:
    """Boolean mask of basis vectors at distance >= margin from every truncation boundary."""
    spin, fock = _factors(geo)
    masks = []
    if spin is not None:
        if not 0 <= margin_spin < spin.halfwidth:
            raise InvalidParameterError(f"margin_spin must lie in [0, {spin.halfwidth}), got {margin_spin}")
        masks.append(np.abs(spin.values) <= spin.halfwidth - margin_spin)
    if fock is not None:
        if not 0 <= margin_fock < fock.cutoff:
            raise InvalidParameterError(f"margin_fock must lie in [0, {fock.cutoff}), got {margin_fock}")
        masks.append(np.arange(fock.dim) <= fock.cutoff - margin_fock)
    if len(masks) == 2:
        return np.kron(masks[0], masks[1]).astype(bool)
    return masks[0]


def interior_projector(geo: Geometry, margin_spin: int = 0, margin_fock: int = 0) -> Operator:
    """Orthogonal projector onto the interior basis vectors."""
    return Operator(geo, np.diag(interior_mask(geo, margin_spin, margin_fock).astype(float)))


def basis_matrix(geo: Geometry, row: int, col: int) -> np.ndarray:
    """|row><col| as a dense matrix, indices in flat order."""
    out = np.zeros((geo.dim, geo.dim), dtype=complex)
    out[row, col] = 1.0
    return out


__all__ = [
    "SpinScheme",
    "FockGeometry",
    "SpinGeometry",
    "TensorGeometry",
    "Geometry",
    "Operator",
    "DensityMatrix",
    "build_fock",
    "build_spin",
    "tensor_embed",
    "default_margins",
    "interior_mask",
    "interior_projector",
    "basis_matrix",
]
