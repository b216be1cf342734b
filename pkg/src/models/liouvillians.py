"""
Liouvillian Builders

Every generator of the OISD family as a labelled superoperator: the open
oscillator, the dissipative shift spin, the coupled model and its general
form, the decoupled and synchronized comparison generators, and the
unitary generators of the finite-ℓ Dicke and infinite-spin Hamiltonians.
"""
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple, Union

import numpy as np

from src.hilbert.spaces import (
    FockGeometry,
    Operator,
    SpinGeometry,
    TensorGeometry,
    build_fock,
    build_spin,
    tensor_embed,
)
from src.models.params import ModelParams
from src.superop.algebra import D, K, SuperOperator, combine
from src.superop.blocks import fock_blocks, oisd_blocks, spin_blocks
from src.utils.errors import InvalidParameterError

logger = logging.getLogger(__name__)


class LiouvillianLabel(str, Enum):
    """Which generator a handle holds."""

    L_PH = "L_ph"
    L_SP = "L_sp"
    L_OISD = "L_OISD"
    L_OISD_GENERAL = "L_OISD_general"
    L_DECOUPLED = "L_decoupled"
    L_DECOUPLED_GENERAL = "L_decoupled_general"
    L_SYN_DEC = "L_syn_dec"
    H_ELL = "H_ell"
    H = "H"

    @property
    def is_unitary(self) -> bool:
        return self in (LiouvillianLabel.H_ELL, LiouvillianLabel.H)


@dataclass(frozen=True)
class LiouvillianHandle:
    """A generator together with the parameters it was built from."""

    superop: SuperOperator
    label: LiouvillianLabel
    params: ModelParams
    hamiltonian: Optional[Operator] = None

    @property
    def geometry(self):
        return self.superop.geometry

    def apply(self, rho) -> np.ndarray:
        return self.superop.apply(rho)


def build_L_ph(params: ModelParams, geo: Union[FockGeometry, TensorGeometry]) -> LiouvillianHandle:
    """
    L_ph = -iωK_N + γ((J+1)D(a,a†) + J D(a†,a)).

    On a tensor geometry the generator acts on the Fock factor.
    """
    params.require_oscillator_dissipation()
    if isinstance(geo, TensorGeometry):
        blocks = oisd_blocks(geo, params.J)
        k_n, d_ph = blocks.K_ph, blocks.D_ph
    else:
        fock = fock_blocks(geo)
        k_n, d_ph = fock.K_N, fock.D_ph(params.J)
    superop = combine([(-1j * params.omega, k_n), (params.gamma, d_ph)])
    return LiouvillianHandle(superop, LiouvillianLabel.L_PH, params)


def build_L_sp(params: ModelParams, geo: Union[SpinGeometry, TensorGeometry]) -> LiouvillianHandle:
    """L_sp = -iμK_M + α₋D(l₋,l₊) + α₊D(l₊,l₋)."""
    if isinstance(geo, TensorGeometry):
        spin = spin_blocks(geo.spin)
        lifted = oisd_blocks(geo, 0.0)
        l_plus = tensor_embed(spin.l_plus, None, geo)
        l_minus = tensor_embed(spin.l_minus, None, geo)
        terms = [
            (-1j * params.mu, lifted.K_sp),
            (params.alpha_minus, D(l_minus, l_plus)),
            (params.alpha_plus, D(l_plus, l_minus)),
        ]
    else:
        spin = spin_blocks(geo)
        terms = [
            (-1j * params.mu, spin.K_M),
            (params.alpha_minus, spin.D_lower),
            (params.alpha_plus, spin.D_raise),
        ]
    return LiouvillianHandle(combine(terms), LiouvillianLabel.L_SP, params)


def _oisd_terms(params: ModelParams, geo: TensorGeometry, spin_dissipation: float):
    blocks = oisd_blocks(geo, params.J)
    return [
        (-1j * params.mu, blocks.K_sp),
        (-1j * params.lam, blocks.K_int),
        (-1j * params.omega, blocks.K_ph),
        (params.gamma, blocks.D_ph),
        (spin_dissipation, blocks.D_sp),
    ]


def build_L_OISD(params: ModelParams, geo: TensorGeometry) -> LiouvillianHandle:
    """L_OISD = -iμK_sp - iλK^int - iωK_ph + γD_ph, with γ > 0."""
    params.require_oscillator_dissipation()
    return LiouvillianHandle(combine(_oisd_terms(params, geo, 0.0)), LiouvillianLabel.L_OISD, params)


def build_L_OISD_general(params: ModelParams, geo: TensorGeometry) -> LiouvillianHandle:
    """L_OISD + γ̄D_sp; γ = 0 is allowed."""
    superop = combine(_oisd_terms(params, geo, params.gamma_bar))
    return LiouvillianHandle(superop, LiouvillianLabel.L_OISD_GENERAL, params)


def _decoupled_terms(params: ModelParams, geo: TensorGeometry, spin_dissipation: float):
    blocks = oisd_blocks(geo, params.J)
    return [
        (-1j * params.mu, blocks.K_sp),
        (spin_dissipation, blocks.D_sp),
        (-1j * params.omega, blocks.K_ph),
        (params.gamma, blocks.D_ph),
    ]


def build_L_decoupled(params: ModelParams, geo: TensorGeometry) -> LiouvillianHandle:
    """-iμK_sp + λγδD_sp - iωK_ph + γD_ph."""
    params.require_oscillator_dissipation()
    superop = combine(_decoupled_terms(params, geo, params.induced_dissipation))
    return LiouvillianHandle(superop, LiouvillianLabel.L_DECOUPLED, params)


def build_L_decoupled_general(params: ModelParams, geo: TensorGeometry) -> LiouvillianHandle:
    """Decoupled generator of the general model: spin dissipation λγδ + γ̄."""
    coefficient = params.induced_dissipation + params.gamma_bar
    superop = combine(_decoupled_terms(params, geo, coefficient))
    return LiouvillianHandle(superop, LiouvillianLabel.L_DECOUPLED_GENERAL, params)


def build_L_syn_dec(params: ModelParams, geo: TensorGeometry) -> LiouvillianHandle:
    """-iμ(K_sp + K_ph) + λγδD_sp: oscillator at the spin frequency and no D_ph."""
    params.require_oscillator_dissipation()
    blocks = oisd_blocks(geo, params.J)
    superop = combine(
        [
            (-1j * params.mu, blocks.K_sp),
            (-1j * params.mu, blocks.K_ph),
            (params.induced_dissipation, blocks.D_sp),
        ]
    )
    return LiouvillianHandle(superop, LiouvillianLabel.L_SYN_DEC, params)


def decoupled_spin_rates(params: ModelParams) -> Tuple[float, float]:
    """(α₋, α₊) of the decoupled spin factor: λγδ(J+1) and λγδJ."""
    rate = params.induced_dissipation + params.gamma_bar
    return rate * (params.J + 1.0), rate * params.J


def ell_ladder(ell: int, geo: SpinGeometry) -> Tuple[Operator, Operator]:
    """
    J_{+,ℓ}/ℓ and J_{-,ℓ}/ℓ embedded in the shift-spin basis.

    J₊|m) = √((ℓ-m)(ℓ+m+1)) |m+1) for -ℓ <= m < ℓ; states with |m| > ℓ
    are annihilated.
    """
    if not 1 <= ell <= geo.halfwidth:
        raise InvalidParameterError(f"ell must lie in 1..{geo.halfwidth}, got {ell}")
    raising = np.zeros((geo.dim, geo.dim))
    for m in range(-ell, ell):
        raising[geo.index(m + 1), geo.index(m)] = np.sqrt((ell - m) * (ell + m + 1)) / ell
    j_plus = Operator(geo, raising)
    return j_plus, j_plus.dag()


def _jaynes_cummings(
    params: ModelParams, geo: TensorGeometry, j_plus: Operator, j_minus: Operator, m_op: Operator
) -> Operator:
    _, a, adag, n_op = build_fock(geo.fock.cutoff)
    return (
        tensor_embed(None, n_op, geo) * params.omega
        + tensor_embed(m_op, None, geo) * params.mu
        + (tensor_embed(j_plus, a, geo) + tensor_embed(j_minus, adag, geo)) * params.lam
    )


def build_H_ell(ell: int, params: ModelParams, geo: TensorGeometry) -> LiouvillianHandle:
    """
    (2ℓ+1)-component Dicke Hamiltonian with couplings J_{±,ℓ}/ℓ.

    Returns:
        Handle of the unitary generator -iK_H; ``hamiltonian`` holds H_ℓ
    """
    j_plus, j_minus = ell_ladder(ell, geo.spin)
    m_values = np.where(np.abs(geo.spin.values) <= ell, geo.spin.values, 0).astype(float)
    hamiltonian = _jaynes_cummings(params, geo, j_plus, j_minus, Operator(geo.spin, np.diag(m_values)))
    return LiouvillianHandle(-1j * K(hamiltonian, f"K_H{ell}"), LiouvillianLabel.H_ELL, params, hamiltonian)


def build_H(params: ModelParams, geo: TensorGeometry) -> LiouvillianHandle:
    """Infinite-spin Dicke Hamiltonian ωN + μM + λ(l₊a + l₋a†)."""
    _, l_plus, l_minus, m_op = build_spin(geo.spin.halfwidth, geo.spin.scheme)
    hamiltonian = _jaynes_cummings(params, geo, l_plus, l_minus, m_op)
    return LiouvillianHandle(-1j * K(hamiltonian, "K_H"), LiouvillianLabel.H, params, hamiltonian)


__all__ = [
    "LiouvillianLabel",
    "LiouvillianHandle",
    "build_L_ph",
    "build_L_sp",
    "build_L_OISD",
    "build_L_OISD_general",
    "build_L_decoupled",
    "build_L_decoupled_general",
    "build_L_syn_dec",
    "build_H_ell",
    "build_H",
    "ell_ladder",
    "decoupled_spin_rates",
]
