"""
Oscillator Semigroups

Closed-form Kraus realizations of the semigroups generated by D(a†,a),
D(a,a†) and the J-weighted D_ph, plus the factorized propagator of the
damped oscillator L_ph and its Gibbs state.

All maps act on Fock-space matrices. Use ``src.propagators.lift`` to act on
the Fock factor of a tensor-space operator.
"""
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Tuple

import numpy as np
from scipy.special import gammaln

from src.hilbert.spaces import DensityMatrix, FockGeometry, Operator, build_fock
from src.models.params import ModelParams
from src.numerics.linalg import expm, trace_norm
from src.superop.algebra import as_matrix, unvec, vec
from src.superop.blocks import fock_blocks
from src.utils.errors import InvalidParameterError, ResourceLimitError

logger = logging.getLogger(__name__)


def _fock_geometry(rho: np.ndarray) -> FockGeometry:
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1] or rho.shape[0] < 2:
        raise InvalidParameterError(f"expected a square Fock-space matrix, got shape {rho.shape}")
    return FockGeometry(rho.shape[0] - 1)


def _require_nonnegative(name: str, value: float) -> None:
    if not value >= 0:
        raise InvalidParameterError(f"{name} must be >= 0, got {value}")


def phi_basis(n: int, m: int, geo: FockGeometry) -> np.ndarray:
    """
    Φ_{n,m} = K(a†)ⁿ K(a)ᵐ (|0⟩⟨0|), the common eigenvectors of K_N and D(a,a†).

    Args:
        n: Power of K(a†)
        m: Power of K(a)
        geo: Fock geometry

    Returns:
        Dense Φ_{n,m}
    """
    if not (0 <= n <= geo.cutoff and 0 <= m <= geo.cutoff):
        raise InvalidParameterError(f"phi_basis indices ({n}, {m}) outside 0..{geo.cutoff}")
    blocks = fock_blocks(geo)
    phi = np.zeros((geo.dim, geo.dim), dtype=complex)
    phi[0, 0] = 1.0
    for _ in range(m):
        phi = blocks.K_a.apply(phi)
    for _ in range(n):
        phi = blocks.K_adag.apply(phi)
    return phi


def s_semigroup(t: float, rho: np.ndarray) -> np.ndarray:
    """
    S_t = e^{tD(a†,a)}.

    Σ_n (xⁿ/n!) a†ⁿ e^{-t(N+1)} ρ e^{-t(N+1)} aⁿ with x = 1 - e^{-2t}. The
    series terminates at n = cutoff.
    """
    if t < 0:
        raise InvalidParameterError(f"s_semigroup needs t >= 0, got {t}; use s_semigroup_inverse")
    return _lowering_dress_series(t, as_matrix(rho))


def s_semigroup_inverse(t: float, rho: np.ndarray) -> np.ndarray:
    """
    S_{-t}, the inverse of S_t, by the same series continued to negative time.

    Only converges for |1 - e^{2t}| < 1 and does not preserve positivity.

    Raises:
        ResourceLimitError: Outside the convergence region
    """
    x = -math.expm1(2.0 * t)
    if abs(x) >= 1.0:
        raise ResourceLimitError(
            f"S_(-t) series diverges at t={t}: |1 - e^(2t)| = {abs(x):.4f} >= 1; "
            f"the inverse is only available for t < {math.log(2.0) / 2:.6f}"
        )
    return _lowering_dress_series(-t, as_matrix(rho))


def _lowering_dress_series(t: float, rho: np.ndarray) -> np.ndarray:
    geo = _fock_geometry(rho)
    _, a, adag, _ = build_fock(geo.cutoff)
    x = -math.expm1(-2.0 * t)
    scale = np.exp(-t * (np.arange(geo.dim) + 1.0))
    term = scale[:, None] * rho * scale[None, :]
    out = term.copy()
    for n in range(1, geo.dim):
        term = (x / n) * (adag.matrix @ term @ a.matrix)
        out += term
    return out


def d_aad_semigroup(t: float, rho: np.ndarray) -> np.ndarray:
    """
    e^{tD(a,a†)}.

    Σ_n (yⁿ/n!) aⁿ e^{-tN} ρ e^{-tN} a†ⁿ with y = e^{2t} - 1.
    """
    if t < 0:
        raise InvalidParameterError(f"d_aad_semigroup needs t >= 0, got {t}; use d_aad_semigroup_inverse")
    return _raising_dress_series(t, as_matrix(rho))


def d_aad_semigroup_inverse(t: float, rho: np.ndarray) -> np.ndarray:
    """e^{-tD(a,a†)}; not positivity preserving."""
    return _raising_dress_series(-t, as_matrix(rho))


def _raising_dress_series(t: float, rho: np.ndarray) -> np.ndarray:
    geo = _fock_geometry(rho)
    _, a, adag, _ = build_fock(geo.cutoff)
    y = math.expm1(2.0 * t)
    scale = np.exp(-t * np.arange(geo.dim))
    term = scale[:, None] * rho * scale[None, :]
    out = term.copy()
    for n in range(1, geo.dim):
        term = (y / n) * (a.matrix @ term @ adag.matrix)
        out += term
    return out


class KrausDirection(str, Enum):
    """Which oscillator semigroup a Kraus family realizes."""

    LOWERING_DRESS = "lowering_dress"  # S_t = e^{tD(a†,a)}
    RAISING_DRESS = "raising_dress"  # e^{tD(a,a†)}


@dataclass(frozen=True)
class KrausFamily:
    """Finite Kraus decomposition of an oscillator semigroup at time ``time``."""

    time: float
    direction: KrausDirection
    members: Tuple[Operator, ...]

    def apply(self, rho: np.ndarray) -> np.ndarray:
        rho = as_matrix(rho)
        return sum(e.matrix @ rho @ e.matrix.conj().T for e in self.members)

    def normalization(self) -> np.ndarray:
        """Σ E_n† E_n."""
        return sum(e.matrix.conj().T @ e.matrix for e in self.members)

    def normalization_residual(self, levels: int) -> float:
        """max |Σ E_n†E_n - 1| on occupations 0..levels."""
        block = self.normalization()[: levels + 1, : levels + 1]
        return float(np.max(np.abs(block - np.eye(levels + 1))))


def kraus_family(direction: KrausDirection, t: float, geo: FockGeometry) -> KrausFamily:
    """
    Kraus operators of S_t or of e^{tD(a,a†)} on a truncated Fock space.

    LOWERING_DRESS members E_n = √(xⁿ/n!) a†ⁿ e^{-t(N+1)} fill the sub-diagonal
    band n; RAISING_DRESS members √(yⁿ/n!) aⁿ e^{-tN} the super-diagonal band n.
    Entries are evaluated in log-space. Members that vanish identically are dropped.

    Args:
        direction: Semigroup to decompose
        t: Time, >= 0
        geo: Fock geometry

    Returns:
        KrausFamily with at most cutoff + 1 members
    """
    _require_nonnegative("t", t)
    direction = KrausDirection(direction)
    levels = np.arange(geo.dim, dtype=float)
    members = [Operator(geo, np.diag(np.exp(-t * (levels + 1.0)) if direction is KrausDirection.LOWERING_DRESS
                                     else np.exp(-t * levels)))]
    if t > 0:
        if direction is KrausDirection.LOWERING_DRESS:
            log_rate = math.log(-math.expm1(-2.0 * t))
        else:
            log_rate = math.log(math.expm1(2.0 * t))
        for n in range(1, geo.dim):
            source = np.arange(geo.dim - n, dtype=float)
            if direction is KrausDirection.LOWERING_DRESS:
                # (i+n, i) entries: √C(i+n, n) x^{n/2} e^{-t(i+1)}
                log_entry = 0.5 * (gammaln(source + n + 1) - gammaln(source + 1) - gammaln(n + 1))
                log_entry += 0.5 * n * log_rate - t * (source + 1.0)
                matrix = np.diag(np.exp(log_entry), k=-n)
            else:
                # (i-n, i) entries: √C(i, n) y^{n/2} e^{-ti}, i = n..cutoff
                target = source + n
                log_entry = 0.5 * (gammaln(target + 1) - gammaln(source + 1) - gammaln(n + 1))
                log_entry += 0.5 * n * log_rate - t * target
                matrix = np.diag(np.exp(log_entry), k=n)
            if np.any(matrix):
                members.append(Operator(geo, matrix))
    logger.debug(f"Kraus family {direction.value} at t={t:g}: {len(members)} members")
    return KrausFamily(float(t), direction, tuple(members))


def tau1(s: float, J: float) -> float:
    """τ₁(s) = ½ log(J + 1 - J e^{-2s})."""
    _require_nonnegative("s", s)
    _require_nonnegative("J", J)
    return 0.5 * math.log1p(-J * math.expm1(-2.0 * s))


def tau(J: float) -> float:
    """τ with e^{2τ} = J + 1, the limit of τ₁."""
    _require_nonnegative("J", J)
    return 0.5 * math.log1p(J)


def exp_dph(s: float, J: float, rho: np.ndarray) -> np.ndarray:
    """
    e^{sD_ph} with D_ph = (J+1)D(a,a†) + J D(a†,a), for any real s.

    s >= 0 uses S_{τ₁(s)} ∘ e^{(s+τ₁(s))D(a,a†)}. s < 0 inverts both factors
    by their series while |1 - e^{2τ₁(|s|)}| < 1 and falls back to the dense
    exponential otherwise.
    """
    _require_nonnegative("J", J)
    rho = as_matrix(rho)
    if s >= 0:
        shift = tau1(s, J)
        return s_semigroup(shift, d_aad_semigroup(s + shift, rho))
    shift = tau1(-s, J)
    try:
        return d_aad_semigroup_inverse(-s + shift, s_semigroup_inverse(shift, rho))
    except ResourceLimitError:
        logger.info(f"exp_dph(s={s:g}, J={J:g}): series inverse out of range, using dense expm")
        return exp_dph_dense(s, J, rho)


def exp_dph_dense(s: float, J: float, rho: np.ndarray) -> np.ndarray:
    """Dense-expm route for e^{sD_ph} on the truncated generator."""
    rho = as_matrix(rho)
    geo = _fock_geometry(rho)
    generator = fock_blocks(geo).D_ph(J).to_matrix()
    return unvec(expm(s * generator) @ vec(rho), geo.dim)


def cross_check_exp_dph(s: float, J: float, rho: np.ndarray, levels: int) -> float:
    """Trace-norm gap between the factorized and dense routes on occupations 0..levels."""
    factorized = exp_dph(s, J, rho)
    dense = exp_dph_dense(s, J, rho)
    window = slice(0, levels + 1)
    gap = trace_norm((factorized - dense)[window, window])
    logger.debug(f"exp_dph cross-check s={s:g} J={J:g}: {gap:.3e}")
    return gap


def _rotate_number(rho: np.ndarray, phase: float) -> np.ndarray:
    """e^{-i phase N} ρ e^{i phase N}."""
    levels = np.arange(rho.shape[0])
    return rho * np.exp(-1j * phase * (levels[:, None] - levels[None, :]))


def expL_ph(t: float, rho: np.ndarray, params: ModelParams) -> np.ndarray:
    """
    e^{tL_ph}(ρ) for L_ph = -iωK_N + γD_ph.

    Phase rotation by ωt after S_{τ₁(tγ)} ∘ e^{(tγ+τ₁(tγ))D(a,a†)}.
    """
    if t < 0:
        raise InvalidParameterError(f"expL_ph needs t >= 0, got {t}")
    params.require_oscillator_dissipation()
    return _rotate_number(exp_dph(t * params.gamma, params.J, rho), params.omega * t)


def gibbs_state(omega: float, J: float, geo: FockGeometry) -> DensityMatrix:
    """
    Truncated Gibbs state of the oscillator, p_n ∝ (J/(J+1))ⁿ.

    J = 0 gives the vacuum, the zero-temperature limit.
    """
    if not omega > 0:
        raise InvalidParameterError(f"omega must be > 0, got {omega}")
    _require_nonnegative("J", J)
    if J == 0:
        logger.warning("Gibbs state at J=0 is the vacuum (zero-temperature limit)")
        weights = np.zeros(geo.dim)
        weights[0] = 1.0
    else:
        weights = (J / (J + 1.0)) ** np.arange(geo.dim)
    return DensityMatrix(geo, np.diag(weights / weights.sum()))


def dressed_eigenvector(n: int, m: int, J: float, geo: FockGeometry) -> np.ndarray:
    """S_τ(Φ_{n,m}), the eigenvector of L_ph with eigenvalue -iω(n-m) - γ(n+m)."""
    return s_semigroup(tau(J), phi_basis(n, m, geo))


def dressed_eigenvalue(n: int, m: int, params: ModelParams) -> complex:
    return complex(-1j * params.omega * (n - m) - params.gamma * (n + m))


__all__ = [
    "phi_basis",
    "s_semigroup",
    "s_semigroup_inverse",
    "d_aad_semigroup",
    "d_aad_semigroup_inverse",
    "KrausDirection",
    "KrausFamily",
    "kraus_family",
    "tau1",
    "tau",
    "exp_dph",
    "exp_dph_dense",
    "cross_check_exp_dph",
    "expL_ph",
    "gibbs_state",
    "dressed_eigenvector",
    "dressed_eigenvalue",
]
