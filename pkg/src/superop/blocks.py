"""
Named Superoperators

The building blocks every Liouvillian is assembled from: the oscillator
commutators and dissipators on F, the spin ones on G, and the embedded
interaction blocks on H = G (x) F.
"""
from dataclasses import dataclass
from functools import lru_cache

from src.hilbert.spaces import (
    FockGeometry,
    Operator,
    SpinGeometry,
    TensorGeometry,
    build_fock,
    build_spin,
    tensor_embed,
)
from src.superop.algebra import D, K, SuperOperator, combine


@dataclass(frozen=True)
class FockBlocks:
    geometry: FockGeometry
    a: Operator
    adag: Operator
    n_op: Operator
    K_a: SuperOperator
    K_adag: SuperOperator
    K_N: SuperOperator
    D_damp: SuperOperator  # D_{a∘a†}
    D_heat: SuperOperator  # D_{a†∘a}

    def D_ph(self, J: float) -> SuperOperator:
        """(J+1) D_{a∘a†} + J D_{a†∘a}."""
        return combine([(J + 1.0, self.D_damp), (J, self.D_heat)])


@dataclass(frozen=True)
class SpinBlocks:
    geometry: SpinGeometry
    l_plus: Operator
    l_minus: Operator
    m_op: Operator
    K_M: SuperOperator
    D_lower: SuperOperator  # D_{l₋∘l₊}
    D_raise: SuperOperator  # D_{l₊∘l₋}


@dataclass(frozen=True)
class OISDBlocks:
    """Embedded blocks of the OISD Liouvillian for one bath parameter J."""

    geometry: TensorGeometry
    J: float
    K_sp: SuperOperator
    K_ph: SuperOperator
    K_mp: SuperOperator  # K^int_{-+} = K_{l₋a†}
    K_pm: SuperOperator  # K^int_{+-} = K_{l₊a}
    D_sp: SuperOperator
    D_ph: SuperOperator
    D_mp: SuperOperator  # D^int_{-+}
    D_pm: SuperOperator  # D^int_{+-}

    @property
    def K_int(self) -> SuperOperator:
        return self.K_mp + self.K_pm


@lru_cache(maxsize=16)
def fock_blocks(geo: FockGeometry) -> FockBlocks:
    _, a, adag, n_op = build_fock(geo.cutoff)
    return FockBlocks(
        geometry=geo,
        a=a,
        adag=adag,
        n_op=n_op,
        K_a=K(a, "K_a"),
        K_adag=K(adag, "K_adag"),
        K_N=K(n_op, "K_N"),
        D_damp=D(a, adag, "D_aad"),
        D_heat=D(adag, a, "D_ada"),
    )


@lru_cache(maxsize=16)
def spin_blocks(geo: SpinGeometry) -> SpinBlocks:
    _, l_plus, l_minus, m_op = build_spin(geo.halfwidth, geo.scheme)
    return SpinBlocks(
        geometry=geo,
        l_plus=l_plus,
        l_minus=l_minus,
        m_op=m_op,
        K_M=K(m_op, "K_M"),
        D_lower=D(l_minus, l_plus, "D_lmlp"),
        D_raise=D(l_plus, l_minus, "D_lplm"),
    )


@lru_cache(maxsize=16)
def oisd_blocks(geo: TensorGeometry, J: float) -> OISDBlocks:
    """Blocks K_sp, K_ph, K^int_{∓±}, D_sp, D_ph, D^int_{∓±} on H."""
    fock = fock_blocks(geo.fock)
    spin = spin_blocks(geo.spin)
    a = tensor_embed(None, fock.a, geo)
    adag = tensor_embed(None, fock.adag, geo)
    l_plus = tensor_embed(spin.l_plus, None, geo)
    l_minus = tensor_embed(spin.l_minus, None, geo)
    weights = (J + 1.0, J)
    return OISDBlocks(
        geometry=geo,
        J=J,
        K_sp=K(tensor_embed(spin.m_op, None, geo), "K_sp"),
        K_ph=K(tensor_embed(None, fock.n_op, geo), "K_ph"),
        K_mp=K(l_minus @ adag, "K_int_mp"),
        K_pm=K(l_plus @ a, "K_int_pm"),
        D_sp=combine([(weights[0], D(l_minus, l_plus)), (weights[1], D(l_plus, l_minus))]),
        D_ph=combine([(weights[0], D(a, adag)), (weights[1], D(adag, a))]),
        D_mp=combine([(weights[0], D(l_minus, adag)), (weights[1], D(adag, l_minus))]),
        D_pm=combine([(weights[0], D(a, l_plus)), (weights[1], D(l_plus, a))]),
    )


__all__ = ["FockBlocks", "SpinBlocks", "OISDBlocks", "fock_blocks", "spin_blocks", "oisd_blocks"]
