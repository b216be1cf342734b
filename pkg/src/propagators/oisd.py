"""
OISD Product Formula

e^{tL_OISD} = e^{-it(μK_sp+ωK_ph)} W(η₁(t)) e^{tγD_ph + τ₂(t)D_sp} W(η₂(t)),
with η₁ in closed form and η₂, τ₂ by adaptive quadrature of
    η₂'(t) sinh γt = γη₁(t),    τ₂'(t) = γ|η₁(t)|².
"""
import cmath
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict

import numpy as np
from scipy.integrate import quad

from src.hilbert.spaces import TensorGeometry
from src.models.params import ModelParams
from src.propagators.spin import exp_dsp_tensor
from src.propagators.transforms import lifted_exp_dph, w_transform
from src.superop.algebra import as_matrix
from src.utils.errors import InvalidParameterError, ResourceLimitError

logger = logging.getLogger(__name__)

QUAD_EPSABS = 1e-12
QUAD_EPSREL = 1e-10
RESIDUAL_STEP = 1e-5
RESIDUAL_MIN_TIME = 1e-2
SCHEDULE_TOLERANCE = 1e-8
SMALL_ARGUMENT = 1e-6


@dataclass(frozen=True)
class ProductSchedule:
    """η₁(t), η₂(t), τ₂(t) and the residuals of their defining ODEs at t."""

    t: float
    eta1: complex
    eta2: complex
    tau2: float
    residuals: Dict[str, float] = field(default_factory=dict)


def _small(t: float, params: ModelParams) -> bool:
    """Both γt and Δt are below the switch to the Taylor series."""
    return max(params.gamma, abs(params.detuning)) * t < SMALL_ARGUMENT


def eta1(t: float, params: ModelParams) -> complex:
    """
    Closed-form η₁(t) with Δ = ω - μ:
    iλ/(Δ²+γ²) (iΔe^{iΔt} + γ(1 - e^{iΔt} cosh γt)/sinh γt).
    """
    if t < 0:
        raise InvalidParameterError(f"eta1 needs t >= 0, got {t}")
    params.require_oscillator_dissipation()
    lam, gamma, detuning = params.lam, params.gamma, params.detuning
    if _small(t, params):
        return complex(-0.5j * lam * t + lam * detuning * t * t / 3.0)
    phase = cmath.exp(1j * detuning * t)
    bracket = 1j * detuning * phase + gamma * (1.0 - phase * math.cosh(gamma * t)) / math.sinh(gamma * t)
    return complex(1j * lam / (detuning ** 2 + gamma ** 2) * bracket)


def _eta2_rate(s: float, params: ModelParams) -> complex:
    """γη₁(s)/sinh γs, continued to s = 0."""
    gamma = params.gamma
    if _small(s, params):
        return complex(-0.5j * params.lam + params.lam * params.detuning * s / 3.0)
    return gamma * eta1(s, params) / math.sinh(gamma * s)


def _tau2_rate(s: float, params: ModelParams) -> float:
    return params.gamma * abs(eta1(s, params)) ** 2


def _integrate(integrand: Callable[[float], float], lower: float, upper: float, name: str) -> float:
    result = quad(integrand, lower, upper, epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL, limit=200, full_output=1)
    if len(result) > 3:
        raise ResourceLimitError(f"quadrature for {name} on [{lower:g}, {upper:g}] did not converge: {result[3]}")
    return float(result[0])


def _integrate_complex(integrand: Callable[[float], complex], lower: float, upper: float, name: str) -> complex:
    real = _integrate(lambda s: integrand(s).real, lower, upper, f"Re {name}")
    imag = _integrate(lambda s: integrand(s).imag, lower, upper, f"Im {name}")
    return complex(real, imag)


def _residuals(t: float, params: ModelParams) -> Dict[str, float]:
    h = RESIDUAL_STEP
    gamma, detuning = params.gamma, params.detuning
    eta1_t = eta1(t, params)
    eta1_prime = (eta1(t + h, params) - eta1(t - h, params)) / (2.0 * h)
    eta1_residual = abs(
        (eta1_prime + gamma * eta1_t / math.tanh(gamma * t)) * cmath.exp(-1j * t * detuning) + 1j * params.lam
    )

    # η₂' and τ₂' from their rate integrals over [t-h, t+h], not from differences of η₂(t), τ₂(t)
    eta2_prime = _integrate_complex(lambda s: _eta2_rate(s, params), t - h, t + h, "eta2") / (2.0 * h)
    tau2_prime = _integrate(lambda s: _tau2_rate(s, params), t - h, t + h, "tau2") / (2.0 * h)
    return {
        "eta1": float(eta1_residual),
        "eta2": float(abs(eta2_prime * math.sinh(gamma * t) - gamma * eta1_t)),
        "tau2": float(abs(tau2_prime - gamma * abs(eta1_t) ** 2)),
    }


def product_schedule(t: float, params: ModelParams) -> ProductSchedule:
    """
    Evaluate η₁, η₂ and τ₂ at time t.

    Args:
        t: Time, >= 0
        params: Model parameters with γ > 0

    Returns:
        ProductSchedule; residuals are evaluated from t = RESIDUAL_MIN_TIME on

    Raises:
        ResourceLimitError: If the quadrature does not converge or a defining ODE
            residual exceeds SCHEDULE_TOLERANCE
    """
    if t < 0:
        raise InvalidParameterError(f"product_schedule needs t >= 0, got {t}")
    params.require_oscillator_dissipation()
    if t == 0:
        return ProductSchedule(0.0, 0j, 0j, 0.0)
    eta2_value = _integrate_complex(lambda s: _eta2_rate(s, params), 0.0, t, "eta2")
    tau2_value = _integrate(lambda s: _tau2_rate(s, params), 0.0, t, "tau2")
    residuals = _residuals(t, params) if t >= RESIDUAL_MIN_TIME else {}
    failed = {name: value for name, value in residuals.items() if not value <= SCHEDULE_TOLERANCE}
    if failed:
        raise ResourceLimitError(f"schedule at t={t:g} misses its defining ODEs: {failed}")
    schedule = ProductSchedule(float(t), eta1(t, params), eta2_value, tau2_value, residuals)
    logger.debug(
        f"Schedule t={t:g}: eta1={schedule.eta1:.6g} eta2={schedule.eta2:.6g} tau2={schedule.tau2:.6g}"
    )
    return schedule


def rotate_free(t: float, rho: np.ndarray, geo: TensorGeometry, mu: float, omega: float) -> np.ndarray:
    """e^{-it(μK_sp + ωK_ph)}(ρ)."""
    energies = mu * np.repeat(geo.spin.values.astype(float), geo.fock.dim) + omega * np.tile(
        np.arange(geo.fock.dim, dtype=float), geo.spin.dim
    )
    phase = np.exp(-1j * t * energies)
    return phase[:, None] * as_matrix(rho) * phase.conj()[None, :]


def expL_OISD_closed(t: float, rho: np.ndarray, params: ModelParams, geo: TensorGeometry) -> np.ndarray:
    """
    e^{tL}(ρ) for the OISD Liouvillian by the product formula.

    A nonzero γ̄ adds γ̄t to the spin dissipation time, since D_sp commutes
    with every other term of the general model.

    Args:
        t: Time, >= 0
        rho: Tensor-space operator
        params: Model parameters with γ > 0
        geo: Tensor geometry

    Returns:
        Evolved operator
    """
    rho = as_matrix(rho)
    if rho.shape != (geo.dim, geo.dim):
        raise InvalidParameterError(f"operator shape {rho.shape} does not match {geo}")
    schedule = product_schedule(t, params)
    if t == 0:
        return rho.copy()
    out = w_transform(schedule.eta2, rho, geo)
    out = lifted_exp_dph(t * params.gamma, params.J, out, geo)
    spin_time = schedule.tau2 + params.gamma_bar * t
    if spin_time > 0:
        out = exp_dsp_tensor(spin_time, params.J, out, geo)
    out = w_transform(schedule.eta1, out, geo)
    return rotate_free(t, out, geo, params.mu, params.omega)


__all__ = ["ProductSchedule", "eta1", "product_schedule", "rotate_free", "expL_OISD_closed"]
