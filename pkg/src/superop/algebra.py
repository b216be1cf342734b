"""
Superoperator Calculus

K_A(rho) = [A, rho] and D_{B∘C}(rho) = 2 B rho C - {CB, rho}, closed under
linear combination and composition. Terms are kept as an expression tree and
applied matrix-free; the dense matrix on the column-stacked vector space is
built on request and cached.
"""
import logging
import threading
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional, Sequence, Tuple, Union

import numpy as np

from src.config import settings
from src.hilbert.spaces import DensityMatrix, Geometry, Operator
from src.utils.errors import InvalidParameterError, ResourceLimitError

logger = logging.getLogger(__name__)

MatrixLike = Union[np.ndarray, Operator, DensityMatrix]


def vec(rho: np.ndarray) -> np.ndarray:
    """Column-stacking vectorization, vec(A X B) = (B^T kron A) vec(X)."""
    return np.asarray(rho).reshape(-1, order="F")


def unvec(vector: np.ndarray, dim: int) -> np.ndarray:
    """Inverse of :func:`vec`."""
    return np.asarray(vector).reshape(dim, dim, order="F")


def as_matrix(rho: MatrixLike) -> np.ndarray:
    """Plain ndarray view of a state or operator argument."""
    if isinstance(rho, (Operator, DensityMatrix)):
        return rho.matrix
    return np.asarray(rho)


class SuperKind(str, Enum):
    """Node types of the superoperator expression tree."""

    COMMUTATOR = "K"
    DISSIPATOR = "D"
    COMBINATION = "combination"
    COMPOSITION = "composition"


@dataclass(frozen=True, eq=False)
class SuperOperator:
    """Linear map on operators of one geometry.

    ``operators`` holds (A,) for K and (B, C, CB) for D. ``terms`` holds
    (coefficient, child) pairs; for compositions the coefficients are 1 and
    the children are ordered left to right, so the last child acts first.
    """

    geometry: Geometry
    kind: SuperKind
    operators: Tuple[np.ndarray, ...] = ()
    terms: Tuple[Tuple[complex, "SuperOperator"], ...] = ()
    label: str = ""
    _dense: dict = field(default_factory=dict, init=False, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, init=False, repr=False)

    @property
    def dim(self) -> int:
        return self.geometry.dim

    def _check(self, rho: MatrixLike) -> np.ndarray:
        matrix = as_matrix(rho)
        if matrix.shape != (self.dim, self.dim):
            raise InvalidParameterError(
                f"cannot apply superoperator on {self.geometry} to a matrix of shape {matrix.shape}"
            )
        return matrix

    def apply(self, rho: MatrixLike) -> np.ndarray:
        """Matrix-free action on ``rho``."""
        return self._apply(self._check(rho))

    def _apply(self, rho: np.ndarray) -> np.ndarray:
        if self.kind is SuperKind.COMMUTATOR:
            (a,) = self.operators
            return a @ rho - rho @ a
        if self.kind is SuperKind.DISSIPATOR:
            b, c, cb = self.operators
            return 2.0 * (b @ rho @ c) - cb @ rho - rho @ cb
        if self.kind is SuperKind.COMBINATION:
            out = np.zeros((self.dim, self.dim), dtype=complex)
            for coefficient, term in self.terms:
                if coefficient != 0:
                    out += coefficient * term._apply(rho)
            return out
        out = rho
        for _, factor in reversed(self.terms):
            out = factor._apply(out)
        return out

    def to_matrix(self) -> np.ndarray:
        """Dense dim² x dim² matrix acting on column-stacked states."""
        if self.dim > settings.dense_dim_limit:
            raise ResourceLimitError(
                f"dense superoperator for dimension {self.dim} exceeds the cap {settings.dense_dim_limit}"
            )
        with self._lock:
            if "matrix" not in self._dense:
                matrix = self._build_matrix()
                matrix.setflags(write=False)
                self._dense["matrix"] = matrix
        return self._dense["matrix"]

    def _build_matrix(self) -> np.ndarray:
        eye = np.eye(self.dim)
        if self.kind is SuperKind.COMMUTATOR:
            (a,) = self.operators
            return np.kron(eye, a) - np.kron(a.T, eye)
        if self.kind is SuperKind.DISSIPATOR:
            b, c, cb = self.operators
            return 2.0 * np.kron(c.T, b) - np.kron(eye, cb) - np.kron(cb.T, eye)
        if self.kind is SuperKind.COMBINATION:
            out = np.zeros((self.dim ** 2, self.dim ** 2), dtype=complex)
            for coefficient, term in self.terms:
                out += coefficient * term.to_matrix()
            return out
        out = np.eye(self.dim ** 2, dtype=complex)
        for _, factor in self.terms:
            out = out @ factor.to_matrix()
        return out

    def __add__(self, other: "SuperOperator") -> "SuperOperator":
        return combine([(1.0, self), (1.0, other)])

    def __sub__(self, other: "SuperOperator") -> "SuperOperator":
        return combine([(1.0, self), (-1.0, other)])

    def __mul__(self, scalar: complex) -> "SuperOperator":
        return combine([(scalar, self)])

    __rmul__ = __mul__

    def __neg__(self) -> "SuperOperator":
        return combine([(-1.0, self)])

    def __matmul__(self, other: "SuperOperator") -> "SuperOperator":
        return compose(self, other)


def _same_geometry(geometries: Iterable[Geometry]) -> Geometry:
    geometries = list(geometries)
    if not geometries:
        raise InvalidParameterError("at least one operand is required")
    first = geometries[0]
    for geo in geometries[1:]:
        if geo != first:
            raise InvalidParameterError(f"geometry mismatch: {first} vs {geo}")
    return first


def K(a: Operator, label: str = "") -> SuperOperator:
    """Commutator superoperator K_A."""
    return SuperOperator(a.geometry, SuperKind.COMMUTATOR, (a.matrix,), label=label or "K")


def D(b: Operator, c: Operator, label: str = "") -> SuperOperator:
    """Dissipator superoperator D_{B∘C}."""
    geo = _same_geometry([b.geometry, c.geometry])
    return SuperOperator(geo, SuperKind.DISSIPATOR, (b.matrix, c.matrix, c.matrix @ b.matrix), label=label or "D")


def combine(terms: Sequence[Tuple[complex, SuperOperator]], geometry: Optional[Geometry] = None) -> SuperOperator:
    """Linear combination sum_i c_i S_i. An empty list needs ``geometry`` and gives zero."""
    if not terms:
        if geometry is None:
            raise InvalidParameterError("an empty combination needs an explicit geometry")
        return SuperOperator(geometry, SuperKind.COMBINATION, label="0")
    geo = _same_geometry([term.geometry for _, term in terms] + ([geometry] if geometry else []))
    return SuperOperator(geo, SuperKind.COMBINATION, terms=tuple((complex(c), s) for c, s in terms))


def compose(*factors: SuperOperator) -> SuperOperator:
    """S1 ∘ S2 ∘ ...; the rightmost factor acts first."""
    geo = _same_geometry([factor.geometry for factor in factors])
    return SuperOperator(geo, SuperKind.COMPOSITION, terms=tuple((1.0 + 0j, f) for f in factors))


def commutator(s1: SuperOperator, s2: SuperOperator) -> SuperOperator:
    """[S1, S2] = S1∘S2 - S2∘S1."""
    return combine([(1.0, compose(s1, s2)), (-1.0, compose(s2, s1))])


def zero(geometry: Geometry) -> SuperOperator:
    return combine([], geometry=geometry)


__all__ = [
    "SuperKind",
    "SuperOperator",
    "K",
    "D",
    "combine",
    "compose",
    "commutator",
    "zero",
    "vec",
    "unvec",
    "as_matrix",
]
