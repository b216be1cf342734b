"""
Interior-Projected Residuals

Identities between superoperators are compared on seeded random samples.
Samples live on the interior (or on a small core around the origin, for maps
that spread states far), and outputs are projected onto the interior before
the norm is taken.
"""
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.config import settings
from src.hilbert.spaces import FockGeometry, Geometry, SpinGeometry, TensorGeometry, interior_mask
from src.superop.algebra import SuperOperator, vec

Applicable = Union[SuperOperator, Callable[[np.ndarray], np.ndarray]]


@dataclass(frozen=True)
class Residual:
    """One verified identity."""

    name: str
    tag: str
    projected: float
    raw: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.projected) and self.projected <= self.tolerance)

    def as_row(self) -> dict:
        return {
            "name": self.name,
            "tag": self.tag,
            "residual": self.projected,
            "raw_residual": self.raw,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


def _as_callable(target: Applicable) -> Callable[[np.ndarray], np.ndarray]:
    return target.apply if isinstance(target, SuperOperator) else target


def core_mask(geo: Geometry, radius: int) -> np.ndarray:
    """Basis vectors with |m| <= radius and n <= radius."""
    if isinstance(geo, TensorGeometry):
        return np.kron(core_mask(geo.spin, radius), core_mask(geo.fock, radius)).astype(bool)
    if isinstance(geo, SpinGeometry):
        return np.abs(geo.values) <= radius
    if isinstance(geo, FockGeometry):
        return np.arange(geo.dim) <= radius
    raise TypeError(f"unknown geometry {geo!r}")


def random_samples(
    geo: Geometry,
    mask: np.ndarray,
    count: int,
    rng: np.random.Generator,
) -> List[np.ndarray]:
    """Complex Gaussian matrices supported on ``mask`` x ``mask``, unit Frobenius norm."""
    support = np.outer(mask, mask)
    samples = []
    for _ in range(count):
        x = (rng.standard_normal((geo.dim, geo.dim)) + 1j * rng.standard_normal((geo.dim, geo.dim))) * support
        samples.append(x / np.linalg.norm(x))
    return samples


def projected_residual(
    lhs: Applicable,
    rhs: Applicable,
    geo: Geometry,
    margins: Tuple[int, int] = (0, 0),
    core_radius: Optional[int] = None,
    samples: Optional[Sequence[np.ndarray]] = None,
    rng: Optional[np.random.Generator] = None,
) -> Tuple[float, float]:
    """
    Compare two maps on interior-supported samples.

    Args:
        lhs, rhs: Superoperators or callables on matrices
        geo: Geometry both act on
        margins: (spin, fock) interior margins for the output projection
        core_radius: If set, samples are restricted to the core of this radius
        samples: Explicit sample matrices; seeded random ones otherwise
        rng: Generator used for random samples

    Returns:
        (projected, raw): the largest ‖P(L - R)(X)P‖_F / max(‖P L(X) P‖_F, ‖P R(X) P‖_F, 1)
        over the samples, and the same quantity without output projection.
    """
    left, right = _as_callable(lhs), _as_callable(rhs)
    out_mask = interior_mask(geo, *margins)
    in_mask = out_mask if core_radius is None else out_mask & core_mask(geo, core_radius)
    if samples is None:
        rng = rng if rng is not None else np.random.default_rng(settings.seed)
        samples = random_samples(geo, in_mask, settings.sample_count, rng)
    window = np.outer(out_mask, out_mask)

    projected, raw = 0.0, 0.0
    for x in samples:
        lx, rx = left(x), right(x)
        scale = max(np.linalg.norm(lx * window), np.linalg.norm(rx * window), 1.0)
        raw_scale = max(np.linalg.norm(lx), np.linalg.norm(rx), 1.0)
        projected = max(projected, float(np.linalg.norm((lx - rx) * window) / scale))
        raw = max(raw, float(np.linalg.norm(lx - rx) / raw_scale))
    return projected, raw


def dense_projected_residual(lhs: SuperOperator, rhs: SuperOperator, margins: Tuple[int, int] = (0, 0)) -> float:
    """Dense counterpart of :func:`projected_residual`: spectral norm of P(L - R)P on vec-space."""
    keep = interior_mask(lhs.geometry, *margins)
    mask = vec(np.outer(keep, keep)).astype(bool)
    diff = (lhs.to_matrix() - rhs.to_matrix())[np.ix_(mask, mask)]
    scale = max(np.linalg.norm(lhs.to_matrix()[np.ix_(mask, mask)], 2), 1.0)
    return float(np.linalg.norm(diff, 2) / scale)


__all__ = [
    "Residual",
    "Applicable",
    "core_mask",
    "random_samples",
    "projected_residual",
    "dense_projected_residual",
]
