"""
Displacement Transforms

W(η) = exp(η K(l₋a†) - η̄ K(l₊a)) and the decoupling transform
V(σ) = W(ζ₁) ∘ e^{σD_ph} ∘ W(ζ₂) on H = G (x) F.

W(η) is conjugation by the unitary exp(η l₋a† - η̄ l₊a), so it is applied
as UρU† rather than through its superoperator matrix.
"""
import logging
import math
from dataclasses import dataclass
from functools import lru_cache
import numpy as np

from src.config import settings
from src.hilbert.spaces import TensorGeometry, build_fock, build_spin, tensor_embed
from src.models.params import ModelParams
from src.numerics.linalg import expm
from src.propagators.lift import lift_fock_map
from src.propagators.oscillator import exp_dph, tau, tau1
from src.superop.algebra import as_matrix
from src.utils.errors import IllConditionedError, InvalidParameterError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TransformParams:
    """Constants of V(σ) for one parameter set."""

    sigma: float
    delta: float
    zeta1: complex
    zeta2: complex
    tau: float
    J: float

    @classmethod
    def from_model(cls, params: ModelParams, sigma: float) -> "TransformParams":
        """
        Derive δ, ζ₁, ζ₂ and τ from the model.

        Args:
            params: Model parameters, γ > 0
            sigma: Transform parameter, > 0

        Returns:
            TransformParams
        """
        if not sigma > 0:
            raise InvalidParameterError(f"sigma must be > 0, got {sigma}")
        params.require_oscillator_dissipation()
        delta = params.delta
        zeta1 = -(params.detuning + 1j * params.gamma / math.tanh(sigma)) * delta
        zeta2 = 1j * params.gamma * delta / math.sinh(sigma)
        return cls(float(sigma), delta, complex(zeta1), complex(zeta2), tau(params.J), params.J)

    def tau1_of(self, s: float) -> float:
        return tau1(s, self.J)


@lru_cache(maxsize=64)
def w_unitary(eta: complex, geo: TensorGeometry) -> np.ndarray:
    """exp(η l₋a† - η̄ l₊a) on ``geo``."""
    _, a, adag, _ = build_fock(geo.fock.cutoff)
    _, l_plus, l_minus, _ = build_spin(geo.spin.halfwidth, geo.spin.scheme)
    generator = (
        eta * tensor_embed(l_minus, adag, geo).matrix
        - np.conj(eta) * tensor_embed(l_plus, a, geo).matrix
    )
    unitary = expm(generator)
    unitary.setflags(write=False)
    return unitary


def w_transform(eta: complex, rho: np.ndarray, geo: TensorGeometry) -> np.ndarray:
    """W(η)(ρ); W(-η) is its inverse."""
    rho = as_matrix(rho)
    if eta == 0:
        return rho.copy()
    unitary = w_unitary(complex(eta), geo)
    return unitary @ rho @ unitary.conj().T


def lifted_exp_dph(s: float, J: float, rho: np.ndarray, geo: TensorGeometry) -> np.ndarray:
    """(1 ⊗ e^{sD_ph})(ρ)."""
    return lift_fock_map(lambda x: exp_dph(s, J, x), rho, geo)


def v_transform(sigma: float, params: ModelParams, rho: np.ndarray, geo: TensorGeometry) -> np.ndarray:
    """V(σ)(ρ) = W(ζ₁) e^{σD_ph} W(ζ₂) (ρ)."""
    constants = TransformParams.from_model(params, sigma)
    out = w_transform(constants.zeta2, rho, geo)
    out = lifted_exp_dph(sigma, params.J, out, geo)
    return w_transform(constants.zeta1, out, geo)


def inverse_sigma_limit(J: float) -> float:
    """
    Largest σ for which e^{-σD_ph} maps finite-photon states to trace-class operators.

    The inverse turns the vacuum into a geometric series of ratio
    -J(e^{2σ}-1)/(1-J(e^{2σ}-1)), which converges only while J(e^{2σ}-1) < 1/2.
    """
    if J < 0:
        raise InvalidParameterError(f"J must be >= 0, got {J}")
    if J == 0:
        return math.inf
    return 0.5 * math.log1p(1.0 / (2.0 * J))


def v_condition_estimate(sigma: float, J: float, cutoff: int) -> float:
    """Growth bound e^{2(σ+τ₁(σ))·cutoff} of e^{-σD_ph} on the truncated space."""
    return math.exp(2.0 * (sigma + tau1(sigma, J)) * cutoff)


def v_inverse(sigma: float, params: ModelParams, rho: np.ndarray, geo: TensorGeometry) -> np.ndarray:
    """
    V(σ)⁻¹(ρ) = W(-ζ₂) e^{-σD_ph} W(-ζ₁) (ρ).

    The result is not guaranteed positive.

    Raises:
        IllConditionedError: If σ is at or beyond inverse_sigma_limit(J), or the growth
            estimate of e^{-σD_ph} exceeds settings.max_condition
    """
    constants = TransformParams.from_model(params, sigma)
    limit = inverse_sigma_limit(params.J)
    if sigma >= limit:
        raise IllConditionedError(
            f"V({sigma:g})^-1 is unbounded at J={params.J:g}: sigma must stay below {limit:.4g}",
            estimate=math.inf,
        )
    estimate = v_condition_estimate(sigma, params.J, geo.fock.cutoff)
    if estimate > settings.max_condition:
        raise IllConditionedError(
            f"V({sigma:g})^-1 at Fock cutoff {geo.fock.cutoff}: condition estimate {estimate:.3e} "
            f"exceeds {settings.max_condition:.1e}",
            estimate=estimate,
        )
    logger.debug(f"V({sigma:g})^-1 condition estimate {estimate:.3e}")
    out = w_transform(-constants.zeta1, rho, geo)
    out = lifted_exp_dph(-sigma, params.J, out, geo)
    return w_transform(-constants.zeta2, out, geo)


__all__ = [
    "TransformParams",
    "w_unitary",
    "w_transform",
    "lifted_exp_dph",
    "v_transform",
    "v_inverse",
    "v_condition_estimate",
    "inverse_sigma_limit",
]
