"""
Identity Suite

Numerical verification of the superoperator calculus: the general
commutation formulas on random operators, the oscillator and spin tables,
and the OISD interaction tables. Every residual is returned; nothing is
filtered.
"""
import logging
from typing import Callable, List, Optional, Tuple

import numpy as np

from src.config import settings
from src.hilbert.spaces import FockGeometry, Operator, TensorGeometry, default_margins
from src.superop.algebra import D, K, SuperOperator, combine, commutator, zero
from src.superop.blocks import fock_blocks, oisd_blocks, spin_blocks
from src.superop.residuals import Residual, projected_residual

logger = logging.getLogger(__name__)

SUITE_TOLERANCE = 1e-9
RANDOM_INSTANCES = 20


def _random_operator(geo: FockGeometry, rng: np.random.Generator) -> Operator:
    n = geo.dim
    return Operator(geo, (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(n))


def _anti(x: Operator, y: Operator) -> Operator:
    return x.anticommutator(y)


def dd_rhs(a: Operator, b: Operator, c: Operator, d: Operator) -> SuperOperator:
    """Right-hand side of [D_{A∘B}, D_{C∘D}] in terms of single dissipators."""
    ba, dc = b @ a, d @ c
    return combine(
        [
            (1.0, D(a.commutator(c), _anti(b, d))),
            (-1.0, D(_anti(a, c), b.commutator(d))),
            (1.0, D(dc.commutator(a), b)),
            (1.0, D(a, b.commutator(dc))),
            (-1.0, D(ba.commutator(c), d)),
            (-1.0, D(c, d.commutator(ba))),
            (1.0, K(ba.commutator(dc))),
        ]
    )


def _random_identity(
    name: str,
    tag: str,
    geo: FockGeometry,
    builder: Callable[..., Tuple[SuperOperator, SuperOperator]],
    arity: int,
    rng: np.random.Generator,
) -> Residual:
    projected, raw = 0.0, 0.0
    for _ in range(RANDOM_INSTANCES):
        operators = [_random_operator(geo, rng) for _ in range(arity)]
        lhs, rhs = builder(*operators)
        p, r = projected_residual(lhs, rhs, geo, rng=rng)
        projected, raw = max(projected, p), max(raw, r)
    return Residual(name, tag, projected, raw, SUITE_TOLERANCE)


def verify_identity_suite(
    geo: TensorGeometry,
    margin: Optional[Tuple[int, int]] = None,
    J: float = 0.5,
    rng: Optional[np.random.Generator] = None,
) -> List[Residual]:
    """
    Evaluate every tabulated superoperator identity on ``geo``.

    Args:
        geo: Tensor geometry; its Fock and spin factors host the single-space tables
        margin: (spin, fock) interior margins, default a quarter of each width
        J: Bath parameter weighting D_sp, D_ph and the interaction dissipators
        rng: Seeded generator for operators and samples

    Returns:
        One Residual per identity, in table order
    """
    rng = rng if rng is not None else np.random.default_rng(settings.seed)
    margin_spin, margin_fock = margin if margin is not None else default_margins(geo)
    fock_margins = (0, margin_fock)
    spin_margins = (margin_spin, 0)
    tensor_margins = (margin_spin, margin_fock)
    fock, spin = fock_blocks(geo.fock), spin_blocks(geo.spin)
    ob = oisd_blocks(geo, J)
    results: List[Residual] = []

    # General formulas on random operators (exact for any finite matrices)
    results.append(
        _random_identity("[K_A,K_B] = K_[A,B]", "KK", geo.fock,
                         lambda a, b: (commutator(K(a), K(b)), K(a.commutator(b))), 2, rng)
    )
    results.append(
        _random_identity(
            "[K_A,D_B∘C] = D_[A,B]∘C + D_B∘[A,C]", "KK", geo.fock,
            lambda a, b, c: (commutator(K(a), D(b, c)), D(a.commutator(b), c) + D(b, a.commutator(c))),
            3, rng,
        )
    )
    results.append(
        _random_identity("[D_A∘B,D_C∘D] seven-term formula", "DD", geo.fock,
                         lambda a, b, c, d: (commutator(D(a, b), D(c, d)), dd_rhs(a, b, c, d)), 4, rng)
    )
    identity = Operator.identity(geo.fock)
    results.append(
        _random_identity("D_A∘1 = K_A", "DK", geo.fock, lambda a: (D(a, identity), K(a)), 1, rng)
    )
    results.append(
        _random_identity("D_1∘B = -K_B", "DK", geo.fock, lambda b: (D(identity, b), -K(b)), 1, rng)
    )

    def check(name: str, tag: str, lhs: SuperOperator, rhs: SuperOperator, margins: Tuple[int, int]) -> None:
        projected, raw = projected_residual(lhs, rhs, lhs.geometry, margins, rng=rng)
        results.append(Residual(name, tag, projected, raw, SUITE_TOLERANCE))

    fzero, szero, tzero = zero(geo.fock), zero(geo.spin), zero(geo)

    # Oscillator table
    check("[K_a,K_a†] = 0", "comKK", commutator(fock.K_a, fock.K_adag), fzero, fock_margins)
    check("[K_a,K_N] = K_a", "comKK", commutator(fock.K_a, fock.K_N), fock.K_a, fock_margins)
    check("[K_a†,K_N] = -K_a†", "comKK", commutator(fock.K_adag, fock.K_N), -fock.K_adag, fock_margins)
    check("[K_a,D_a∘a†] = K_a", "comKD1", commutator(fock.K_a, fock.D_damp), fock.K_a, fock_margins)
    check("[K_a†,D_a∘a†] = K_a†", "comKD1", commutator(fock.K_adag, fock.D_damp), fock.K_adag, fock_margins)
    check("[K_a,D_a†∘a] = -K_a", "comKD2", commutator(fock.K_a, fock.D_heat), -fock.K_a, fock_margins)
    check("[K_a†,D_a†∘a] = -K_a†", "comKD2", commutator(fock.K_adag, fock.D_heat), -fock.K_adag, fock_margins)
    check("[K_N,D_a∘a†] = 0", "comKD3", commutator(fock.K_N, fock.D_damp), fzero, fock_margins)
    check("[K_N,D_a†∘a] = 0", "comKD3", commutator(fock.K_N, fock.D_heat), fzero, fock_margins)
    check(
        "[D_a∘a†,D_a†∘a] = -2(D_a∘a† + D_a†∘a)", "comDD",
        commutator(fock.D_damp, fock.D_heat), -2.0 * (fock.D_damp + fock.D_heat), fock_margins,
    )

    # Spin table
    check("[K_l+,K_l-] = K_[l+,l-]", "KK", commutator(K(spin.l_plus), K(spin.l_minus)),
          K(spin.l_plus.commutator(spin.l_minus)), spin_margins)
    check("[K_M,D_l-∘l+] = 0", "comKDD1", commutator(spin.K_M, spin.D_lower), szero, spin_margins)
    check("[K_M,D_l+∘l-] = 0", "comKDD1", commutator(spin.K_M, spin.D_raise), szero, spin_margins)
    check("[D_l-∘l+,D_l+∘l-] = 0", "comKDD1", commutator(spin.D_lower, spin.D_raise), szero, spin_margins)

    # OISD interaction tables
    check("[K_ph,K_int-+] = K_int-+", "KDpm", commutator(ob.K_ph, ob.K_mp), ob.K_mp, tensor_margins)
    check("-[K_sp,K_int-+] = K_int-+", "KDpm", -commutator(ob.K_sp, ob.K_mp), ob.K_mp, tensor_margins)
    check("[D_ph,D_int-+] = K_int-+", "KDpm", commutator(ob.D_ph, ob.D_mp), ob.K_mp, tensor_margins)
    check("[K_ph,K_int+-] = -K_int+-", "KDpm", commutator(ob.K_ph, ob.K_pm), -ob.K_pm, tensor_margins)
    check("-[K_sp,K_int+-] = -K_int+-", "KDpm", -commutator(ob.K_sp, ob.K_pm), -ob.K_pm, tensor_margins)
    check("[D_ph,D_int+-] = -K_int+-", "KDpm", commutator(ob.D_ph, ob.D_pm), -ob.K_pm, tensor_margins)
    check("[D_ph,K_int-+] = D_int-+", "KDpm", commutator(ob.D_ph, ob.K_mp), ob.D_mp, tensor_margins)
    check("[D_ph,K_int+-] = -D_int+-", "KDpm", commutator(ob.D_ph, ob.K_pm), -ob.D_pm, tensor_margins)
    check("[K_int-+,D_int+-] = -D_sp", "KDpm", commutator(ob.K_mp, ob.D_pm), -ob.D_sp, tensor_margins)
    check("[K_int+-,D_int-+] = D_sp", "KDpm", commutator(ob.K_pm, ob.D_mp), ob.D_sp, tensor_margins)

    check("[K_ph,D_ph] = 0", "KD0", commutator(ob.K_ph, ob.D_ph), tzero, tensor_margins)
    check("[K_sp,D_ph] = 0", "KD0", commutator(ob.K_sp, ob.D_ph), tzero, tensor_margins)
    check("[K_int-+,K_int+-] = 0", "KD0", commutator(ob.K_mp, ob.K_pm), tzero, tensor_margins)
    check("[K_int-+,D_int-+] = 0", "KD0", commutator(ob.K_mp, ob.D_mp), tzero, tensor_margins)
    check("[K_int+-,D_int+-] = 0", "KD0", commutator(ob.K_pm, ob.D_pm), tzero, tensor_margins)
    check("[D_sp,K_int-+] = 0", "KD0", commutator(ob.D_sp, ob.K_mp), tzero, tensor_margins)
    check("[D_sp,K_int+-] = 0", "KD0", commutator(ob.D_sp, ob.K_pm), tzero, tensor_margins)
    check("[D_sp,D_ph] = 0", "KD0", commutator(ob.D_sp, ob.D_ph), tzero, tensor_margins)

    failed = [r.name for r in results if not r.passed]
    if failed:
        logger.warning(f"Identity suite: {len(failed)} of {len(results)} residuals above tolerance: {failed}")
    else:
        logger.info(f"Identity suite: all {len(results)} residuals within {SUITE_TOLERANCE:g}")
    return results


__all__ = ["verify_identity_suite", "dd_rhs", "SUITE_TOLERANCE"]
