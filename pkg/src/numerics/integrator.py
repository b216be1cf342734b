"""
Master Equation Integrator

Adaptive embedded Runge-Kutta integration of d rho/dt = L(rho) with
scipy's explicit Runge-Kutta solvers, stepped by hand so that every
accepted step is hermitized before the next one starts.
"""
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd
from scipy.integrate import DOP853, RK23, RK45

from src.config import ToleranceConfig, settings
from src.hilbert.spaces import DensityMatrix
from src.numerics.linalg import hermitize
from src.superop.algebra import SuperOperator, as_matrix
from src.utils.errors import InvalidParameterError, StiffnessError

logger = logging.getLogger(__name__)

SOLVERS = {"DOP853": DOP853, "RK45": RK45, "RK23": RK23}


@dataclass
class Trajectory:
    """States on a time grid plus integrator diagnostics."""

    grid: np.ndarray
    states: List[DensityMatrix]
    diagnostics: Dict[str, List[Any]] = field(default_factory=dict)

    def __post_init__(self):
        if len(self.grid) != len(self.states):
            raise InvalidParameterError("a trajectory needs one state per grid point")

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame({"t": self.grid})
        for key, values in self.diagnostics.items():
            frame[key] = values
        return frame


def _superop_of(liouvillian: Union[SuperOperator, Any]) -> SuperOperator:
    return liouvillian if isinstance(liouvillian, SuperOperator) else liouvillian.superop


def integrate_master(
    liouvillian: Union[SuperOperator, Any],
    rho0: Union[DensityMatrix, np.ndarray],
    grid: Sequence[float],
    tol: Optional[ToleranceConfig] = None,
    method: str = "DOP853",
) -> Trajectory:
    """
    Integrate the master equation generated by ``liouvillian``.

    Args:
        liouvillian: SuperOperator or a handle exposing ``.superop``
        rho0: Initial state at grid[0]
        grid: Strictly increasing output times
        tol: ODE tolerances (settings.tolerances by default)
        method: One of SOLVERS, an embedded Runge-Kutta pair

    Returns:
        Trajectory with per-segment function evaluations, trace drift and minimum eigenvalues

    Raises:
        StiffnessError: If the step size underflows
    """
    tol = tol or settings.tolerances
    if method not in SOLVERS:
        raise InvalidParameterError(f"unknown integrator {method!r}; choose from {list(SOLVERS)}")
    superop = _superop_of(liouvillian)
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or len(grid) == 0 or np.any(np.diff(grid) <= 0):
        raise InvalidParameterError("time grid must be non-empty and strictly increasing")

    dim = superop.dim
    rho = np.array(as_matrix(rho0), dtype=complex)
    geometry = rho0.geometry if isinstance(rho0, DensityMatrix) else superop.geometry
    trace0 = np.trace(rho)

    def rhs(_t: float, y: np.ndarray) -> np.ndarray:
        return superop.apply(y.reshape(dim, dim)).ravel()

    states = [DensityMatrix(geometry, rho)]
    diagnostics: Dict[str, List[Any]] = {
        "nfev": [0],
        "trace_drift": [0.0],
        "min_eigenvalue": [float(np.linalg.eigvalsh(hermitize(rho)).min())],
    }
    for t_start, t_end in zip(grid[:-1], grid[1:]):
        solver = SOLVERS[method](rhs, t_start, rho.ravel(), t_end, rtol=tol.ode_rel, atol=tol.ode_abs)
        while solver.status == "running":
            message = solver.step()
            if solver.status == "failed":
                raise StiffnessError(
                    f"integration stalled on [{t_start:g}, {t_end:g}] at t={solver.t:g}: {message}; "
                    "use the dense expm route for this generator"
                )
            # restart the FSAL stage from the hermitized state
            solver.y = hermitize(solver.y.reshape(dim, dim)).ravel()
            solver.f = solver.fun(solver.t, solver.y)
        rho = solver.y.reshape(dim, dim).copy()
        states.append(DensityMatrix(geometry, rho))
        diagnostics["nfev"].append(int(solver.nfev))
        diagnostics["trace_drift"].append(float(abs(np.trace(rho) - trace0)))
        diagnostics["min_eigenvalue"].append(float(np.linalg.eigvalsh(rho).min()))

    logger.debug(f"Integrated {len(grid)} grid points, {sum(diagnostics['nfev'])} evaluations")
    return Trajectory(grid, states, diagnostics)


__all__ = ["Trajectory", "integrate_master"]
