"""
Dense Linear Algebra Oracles

Matrix exponential, trace norm and density-matrix validation.
"""
import logging
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy import linalg

from src.config import ToleranceConfig, settings
from src.hilbert.spaces import DensityMatrix, Geometry
from src.utils.errors import DensityViolationError, InvalidParameterError, ResourceLimitError

logger = logging.getLogger(__name__)


def expm(matrix: np.ndarray) -> np.ndarray:
    """Matrix exponential by scaling and squaring with a Padé approximant."""
    matrix = np.asarray(matrix)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise InvalidParameterError(f"expm needs a square matrix, got shape {matrix.shape}")
    if matrix.shape[0] > settings.dense_matrix_limit:
        raise ResourceLimitError(
            f"expm of a {matrix.shape[0]}x{matrix.shape[0]} matrix exceeds the dense cap {settings.dense_matrix_limit}"
        )
    return linalg.expm(matrix)


def trace_norm(x: np.ndarray) -> float:
    """Sum of singular values."""
    x = np.asarray(x)
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise InvalidParameterError(f"trace norm needs a square matrix, got shape {x.shape}")
    return float(np.linalg.svd(x, compute_uv=False).sum())


def hermitize(x: np.ndarray) -> np.ndarray:
    return 0.5 * (x + x.conj().T)


@dataclass(frozen=True)
class DensityCheck:
    """Outcome of :func:`check_density`."""

    hermiticity_defect: float
    trace_defect: float
    min_eigenvalue: float
    passed: bool
    state: Optional[DensityMatrix] = None

    def as_dict(self) -> dict:
        return {
            "hermiticity_defect": self.hermiticity_defect,
            "trace_defect": self.trace_defect,
            "min_eigenvalue": self.min_eigenvalue,
            "passed": self.passed,
        }


def check_density(
    rho: Union[DensityMatrix, np.ndarray],
    tol: Optional[ToleranceConfig] = None,
    geometry: Optional[Geometry] = None,
) -> DensityCheck:
    """
    Validate Hermiticity, unit trace and positivity.

    Args:
        rho: Candidate state
        tol: Tolerances (settings.tolerances by default)
        geometry: Geometry to tag a bare matrix with

    Returns:
        DensityCheck; ``state`` is set when the check passed and a geometry is known
    """
    tol = tol or settings.tolerances
    matrix = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise InvalidParameterError(f"density check needs a square matrix, got shape {matrix.shape}")
    herm_defect = float(np.max(np.abs(matrix - matrix.conj().T))) if matrix.size else 0.0
    trace_defect = float(abs(np.trace(matrix) - 1.0))
    min_eig = float(np.linalg.eigvalsh(hermitize(matrix)).min())
    passed = herm_defect <= tol.herm_tol and trace_defect <= tol.trace_tol and min_eig >= -tol.psd_tol

    state = None
    if passed:
        if isinstance(rho, DensityMatrix):
            state = rho
        elif geometry is not None:
            state = DensityMatrix(geometry, matrix)
    else:
        logger.debug(
            f"Density check failed: herm={herm_defect:.3e} trace={trace_defect:.3e} min_eig={min_eig:.3e}"
        )
    return DensityCheck(herm_defect, trace_defect, min_eig, passed, state)


def require_density(rho: DensityMatrix, tol: Optional[ToleranceConfig] = None) -> DensityMatrix:
    """Return ``rho`` if it is a valid density matrix, raise otherwise."""
    report = check_density(rho, tol)
    if not report.passed:
        raise DensityViolationError("input is not a valid density matrix", report.as_dict())
    return rho


__all__ = ["expm", "trace_norm", "hermitize", "DensityCheck", "check_density", "require_density"]
