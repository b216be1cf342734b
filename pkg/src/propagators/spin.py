"""
Spin Evolution

The dissipative shift-spin semigroup e^{tL_sp} with
L_sp = -iμK_M + α₋D(l₋,l₊) + α₊D(l₊,l₋). The dissipative part is a random
walk of the label n: shift k occurs with the Skellam weight c_k(t) of two
Poisson clocks at rates 2α₋ and 2α₊.
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.special import ive
from scipy.stats import poisson

from src.config import settings
from src.hilbert.spaces import SpinGeometry, SpinScheme, TensorGeometry
from src.propagators.lift import shift_legs
from src.superop.algebra import as_matrix
from src.utils.errors import InvalidParameterError, WidenKmaxError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SpinDistribution:
    """Shift weights c_k(t) for |k| <= kmax."""

    ks: np.ndarray
    weights: np.ndarray
    deficit: float
    mean: float
    variance: float

    @property
    def kmax(self) -> int:
        return int(self.ks[-1])

    @property
    def empirical_mean(self) -> float:
        return float(np.dot(self.ks, self.weights))

    @property
    def empirical_variance(self) -> float:
        return float(np.dot(self.ks.astype(float) ** 2, self.weights) - self.empirical_mean ** 2)

    def weight(self, k: int) -> float:
        return float(self.weights[k + self.kmax]) if abs(k) <= self.kmax else 0.0


def _skellam_weights(ks: np.ndarray, rate_minus: float, rate_plus: float) -> np.ndarray:
    """P(K = k) for K = Poisson(rate_minus) - Poisson(rate_plus)."""
    if rate_minus == 0 and rate_plus == 0:
        return (ks == 0).astype(float)
    if rate_plus == 0:
        return poisson.pmf(ks, rate_minus)
    if rate_minus == 0:
        return poisson.pmf(-ks, rate_plus)
    z = 2.0 * math.sqrt(rate_minus * rate_plus)
    with np.errstate(divide="ignore"):
        log_weights = (
            0.5 * ks * (math.log(rate_minus) - math.log(rate_plus))
            - (math.sqrt(rate_minus) - math.sqrt(rate_plus)) ** 2
            + np.log(ive(np.abs(ks), z))
        )
    return np.exp(log_weights)


def _validate_rates(t: float, alpha_minus: float, alpha_plus: float) -> None:
    if t < 0:
        raise InvalidParameterError(f"t must be >= 0, got {t}")
    if alpha_minus < 0 or alpha_plus < 0:
        raise InvalidParameterError(f"spin rates must be >= 0, got ({alpha_minus}, {alpha_plus})")


def suggest_kmax(t: float, alpha_minus: float, alpha_plus: float, eps: Optional[float] = None) -> int:
    """Smallest kmax whose two-sided tail of c_k(t) is below ``eps``."""
    _validate_rates(t, alpha_minus, alpha_plus)
    eps = settings.spin_series_eps if eps is None else eps
    mean = 2.0 * (alpha_minus - alpha_plus) * t
    spread = math.sqrt(2.0 * (alpha_minus + alpha_plus) * t)
    wide = int(math.ceil(abs(mean) + 40.0 * spread + 50))
    ks = np.arange(-wide, wide + 1)
    weights = _skellam_weights(ks, 2.0 * alpha_minus * t, 2.0 * alpha_plus * t)
    for kmax in range(1, wide + 1):
        inside = weights[wide - kmax: wide + kmax + 1].sum()
        if 1.0 - inside <= eps:
            return kmax
    return wide


def spin_coeffs(
    t: float,
    alpha_minus: float,
    alpha_plus: float,
    kmax: int,
    strict: bool = True,
    eps: Optional[float] = None,
) -> SpinDistribution:
    """
    Shift weights c_k(t) for |k| <= kmax.

    Args:
        t: Time, >= 0
        alpha_minus: Lowering rate α₋
        alpha_plus: Raising rate α₊
        kmax: Largest |k| returned
        strict: Raise when the tail outside the window exceeds ``eps``
        eps: Tail tolerance (settings.spin_series_eps by default)

    Returns:
        SpinDistribution with analytic mean 2(α₋-α₊)t and variance 2(α₋+α₊)t

    Raises:
        WidenKmaxError: If ``strict`` and the tail deficit exceeds ``eps``
    """
    _validate_rates(t, alpha_minus, alpha_plus)
    if kmax < 1:
        raise InvalidParameterError(f"kmax must be >= 1, got {kmax}")
    eps = settings.spin_series_eps if eps is None else eps
    ks = np.arange(-kmax, kmax + 1)
    weights = _skellam_weights(ks, 2.0 * alpha_minus * t, 2.0 * alpha_plus * t)
    deficit = max(0.0, 1.0 - float(weights.sum()))
    if strict and deficit > eps:
        suggested = suggest_kmax(t, alpha_minus, alpha_plus, eps)
        raise WidenKmaxError(
            f"c_k tail {deficit:.3e} beyond kmax={kmax} exceeds {eps:g}", suggested_kmax=suggested, deficit=deficit
        )
    return SpinDistribution(
        ks=ks,
        weights=weights,
        deficit=deficit,
        mean=2.0 * (alpha_minus - alpha_plus) * t,
        variance=2.0 * (alpha_minus + alpha_plus) * t,
    )


def validity_horizon(halfwidth: int, alpha_minus: float, alpha_plus: float) -> float:
    """halfwidth / 2(α₊+α₋): beyond this the walk reaches the truncation boundary."""
    total = alpha_minus + alpha_plus
    return math.inf if total == 0 else halfwidth / (2.0 * total)


def _shift_window(dim: int, scheme: SpinScheme, t: float, alpha_minus: float, alpha_plus: float) -> int:
    if scheme is SpinScheme.HARD:
        return max(dim - 1, 1)
    return max(suggest_kmax(t, alpha_minus, alpha_plus), 1)


def _evolve_legs(
    x: np.ndarray,
    axes: Tuple[int, int],
    spin: SpinGeometry,
    t: float,
    mu: float,
    alpha_minus: float,
    alpha_plus: float,
) -> Tuple[np.ndarray, float]:
    values = spin.values.astype(float)
    phase = np.exp(-1j * mu * t * values)
    shape = [1] * x.ndim
    shape[axes[0]] = spin.dim
    rotated = x * phase.reshape(shape)
    shape = [1] * x.ndim
    shape[axes[1]] = spin.dim
    rotated = rotated * phase.conj().reshape(shape)
    if alpha_minus == 0 and alpha_plus == 0:
        return rotated, 0.0

    kmax = _shift_window(spin.dim, spin.scheme, t, alpha_minus, alpha_plus)
    dist = spin_coeffs(t, alpha_minus, alpha_plus, kmax, strict=False)
    out = np.zeros_like(rotated)
    for k, weight in zip(dist.ks, dist.weights):
        if weight > 0:
            out += weight * shift_legs(rotated, int(k), axes, spin.scheme)
    return out, dist.deficit


def _warn_horizon(t: float, spin: SpinGeometry, alpha_minus: float, alpha_plus: float) -> None:
    horizon = validity_horizon(spin.halfwidth, alpha_minus, alpha_plus)
    if t > horizon:
        logger.warning(
            f"Spin evolution at t={t:g} beyond the truncation horizon {horizon:.3g} "
            f"(halfwidth {spin.halfwidth}); boundary leakage is not negligible"
        )


def expL_sp(
    t: float,
    rho: np.ndarray,
    mu: float,
    alpha_minus: float,
    alpha_plus: float,
    geo: Optional[SpinGeometry] = None,
) -> np.ndarray:
    """
    e^{tL_sp}(ρ) = Σ_k c_k(t) l₋ᵏ e^{-iμtM} ρ e^{iμtM} l₊ᵏ on the spin space.

    Args:
        t: Time, >= 0
        rho: Spin-space matrix
        mu: Spin frequency
        alpha_minus: Lowering rate
        alpha_plus: Raising rate
        geo: Spin geometry; hard-boundary geometry of matching size by default

    Returns:
        Evolved matrix. Trace lost to the boundary is logged at debug level.
    """
    _validate_rates(t, alpha_minus, alpha_plus)
    rho = as_matrix(rho)
    geo = geo if geo is not None else SpinGeometry((rho.shape[0] - 1) // 2)
    if rho.shape != (geo.dim, geo.dim):
        raise InvalidParameterError(f"spin matrix shape {rho.shape} does not match {geo}")
    _warn_horizon(t, geo, alpha_minus, alpha_plus)
    out, deficit = _evolve_legs(rho, (0, 1), geo, t, mu, alpha_minus, alpha_plus)
    logger.debug(
        f"expL_sp t={t:g}: series deficit {deficit:.2e}, trace change {abs(np.trace(out) - np.trace(rho)):.2e}"
    )
    return out


def spin_leakage(t: float, rho: np.ndarray, alpha_minus: float, alpha_plus: float, geo: SpinGeometry) -> float:
    """Trace lost through the spin boundary after time t."""
    out = expL_sp(t, rho, 0.0, alpha_minus, alpha_plus, geo)
    return float(abs(np.trace(rho) - np.trace(out)))


def expL_sp_tensor(
    t: float,
    rho: np.ndarray,
    geo: TensorGeometry,
    mu: float,
    alpha_minus: float,
    alpha_plus: float,
) -> np.ndarray:
    """(e^{tL_sp} ⊗ 1)(ρ) on the spin legs of a tensor-space operator."""
    _validate_rates(t, alpha_minus, alpha_plus)
    rho = as_matrix(rho)
    if rho.shape != (geo.dim, geo.dim):
        raise InvalidParameterError(f"operator shape {rho.shape} does not match {geo}")
    _warn_horizon(t, geo.spin, alpha_minus, alpha_plus)
    out, _ = _evolve_legs(rho.reshape(geo.shape4), (0, 2), geo.spin, t, mu, alpha_minus, alpha_plus)
    return out.reshape(geo.dim, geo.dim)


def exp_dsp_tensor(s: float, J: float, rho: np.ndarray, geo: TensorGeometry) -> np.ndarray:
    """e^{sD_sp} on a tensor operator, D_sp = (J+1)D(l₋,l₊) + J D(l₊,l₋)."""
    return expL_sp_tensor(s, rho, geo, 0.0, J + 1.0, J)


__all__ = [
    "SpinDistribution",
    "spin_coeffs",
    "suggest_kmax",
    "validity_horizon",
    "expL_sp",
    "expL_sp_tensor",
    "exp_dsp_tensor",
    "spin_leakage",
]
