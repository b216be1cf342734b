"""Finite-difference consistency between a propagator and its generator."""
from typing import Any, Callable, Optional, Union

import numpy as np

from src.config import settings
from src.numerics.linalg import trace_norm
from src.superop.algebra import SuperOperator, as_matrix

Propagate = Callable[[float, np.ndarray], np.ndarray]


def generator_fd_check(
    propagate: Propagate,
    liouvillian: Union[SuperOperator, Any],
    rho: np.ndarray,
    h: Optional[float] = None,
) -> float:
    """‖(-3P_0 + 4P_h - P_2h)(rho)/(2h) - L(rho)‖_1."""
    h = h if h is not None else settings.tolerances.fd_step
    superop = liouvillian if isinstance(liouvillian, SuperOperator) else liouvillian.superop
    rho = as_matrix(rho)
    derivative = (-3.0 * propagate(0.0, rho) + 4.0 * propagate(h, rho) - propagate(2.0 * h, rho)) / (2.0 * h)
    return trace_norm(derivative - superop.apply(rho))


__all__ = ["generator_fd_check"]
