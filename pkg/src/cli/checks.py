"""
Check Manifest

Every acceptance check the ``verify`` command runs, registered under a
unique name with the tag its residual rows carry.
"""
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from src.cli.config import RunConfig
from src.hilbert.spaces import FockGeometry, SpinGeometry, TensorGeometry, build_fock, default_margins, interior_mask
from src.models.decoupling import gamma_zero_transform, verify_decoupling
from src.models.experiments import (
    ODE_GEOMETRY_LIMIT,
    comparison_state,
    expL_syn_dec,
    finite_ell_demo,
    prop2_experiment,
    rho_star,
    rho_star_limit_residual,
    window_population,
)
from src.models.liouvillians import build_L_OISD, build_L_ph
from src.models.params import ModelParams
from src.models.spectrum import oscillator_spectrum
from src.numerics.fd import generator_fd_check
from src.numerics.integrator import integrate_master
from src.numerics.linalg import check_density, expm, trace_norm
from src.propagators.oisd import expL_OISD_closed, product_schedule
from src.propagators.oscillator import (
    KrausDirection,
    expL_ph,
    gibbs_state,
    kraus_family,
    s_semigroup,
    tau,
)
from src.propagators.spin import expL_sp, spin_coeffs, suggest_kmax
from src.propagators.transforms import v_transform
from src.superop.algebra import D, unvec, vec
from src.superop.identities import verify_identity_suite
from src.superop.residuals import Residual
from src.utils.errors import InvalidParameterError

logger = logging.getLogger(__name__)

FOCK_ORACLE_CUTOFF = 24
ODE_FOCK_CUTOFF = 14
OISD_WINDOW_JUMPS = 12.0
SYNC_COUPLING = 0.05
SYNC_WIDTH = 12


@dataclass
class CheckContext:
    """Shared inputs of one verification run."""

    config: RunConfig
    rng: np.random.Generator = field(init=False)

    def __post_init__(self):
        self.rng = np.random.default_rng(self.config.seed)

    @property
    def params(self) -> ModelParams:
        return self.config.model_params()

    @property
    def geometry(self) -> TensorGeometry:
        return self.config.geometry()

    @property
    def fock(self) -> FockGeometry:
        return FockGeometry(max(self.config.fock_cutoff, FOCK_ORACLE_CUTOFF))

    def random_state(self, dim: int, support: int) -> np.ndarray:
        """Random density matrix on the first ``support`` basis vectors."""
        x = np.zeros((dim, dim), dtype=complex)
        g = self.rng.standard_normal((support, support)) + 1j * self.rng.standard_normal((support, support))
        x[:support, :support] = g @ g.conj().T
        return x / np.trace(x).real


@dataclass(frozen=True)
class Check:
    name: str
    tag: str
    description: str
    runner: Callable[[CheckContext], List[Residual]]
    slow: bool = False


def _levels(geo: FockGeometry, config: RunConfig) -> int:
    return geo.cutoff - config.margins()[1]


def _fock_window(x: np.ndarray, levels: int) -> np.ndarray:
    return x[: levels + 1, : levels + 1]


def check_identities(ctx: CheckContext) -> List[Residual]:
    return verify_identity_suite(ctx.geometry, ctx.config.margins(), ctx.params.J, ctx.rng)


def check_kraus(ctx: CheckContext) -> List[Residual]:
    rows = []
    geo = FockGeometry(ctx.config.fock_cutoff)
    for t in (0.1, 1.0, 5.0):
        family = kraus_family(KrausDirection.RAISING_DRESS, t, geo)
        residual = family.normalization_residual(geo.cutoff)
        rows.append(Residual(f"Σ Ẽ†Ẽ = 1 at t={t:g}", "trace=1", residual, 0.0, 1e-10))
    family = kraus_family(KrausDirection.LOWERING_DRESS, 0.05, geo)
    residual = family.normalization_residual(2)
    rows.append(Residual("Σ E†E = 1 at t=0.05, levels 0..2", "trace=1", residual, 0.0, 1e-10))
    rho = ctx.random_state(geo.dim, 3)
    gap = trace_norm(kraus_family(KrausDirection.LOWERING_DRESS, 0.5, geo).apply(rho) - s_semigroup(0.5, rho))
    rows.append(Residual("Kraus family reproduces S_t", "trace=1", gap, gap, 1e-12))
    return rows


def check_semigroup(ctx: CheckContext) -> List[Residual]:
    geo = ctx.fock
    rho = ctx.random_state(geo.dim, 3)
    gap = trace_norm(s_semigroup(0.3, s_semigroup(0.7, rho)) - s_semigroup(1.0, rho))
    return [Residual("S_0.3∘S_0.7 = S_1", "3eq", gap, gap, 1e-9)]


def _state_rows(name: str, out: np.ndarray) -> List[Residual]:
    report = check_density(out)
    negativity = max(0.0, -report.min_eigenvalue)
    return [
        Residual(f"|Tr {name} - 1|", "CP", report.trace_defect, report.trace_defect, 1e-10),
        Residual(f"-λ_min {name}", "CP", negativity, negativity, 1e-8),
    ]


def check_propagator_states(ctx: CheckContext) -> List[Residual]:
    """Every propagator maps a density matrix to a density matrix."""
    params = ctx.params
    fock = FockGeometry(32)
    rho = ctx.random_state(fock.dim, 3)
    rows = _state_rows("S_0.1 ρ", s_semigroup(0.1, rho))
    for t in (0.1, 1.0, 5.0):
        rows.extend(_state_rows(f"e^({t:g}L_ph) ρ", expL_ph(t, rho, params)))

    spin = SpinGeometry(64)
    centre = [spin.index(m) for m in range(-2, 3)]
    rho = np.zeros((spin.dim, spin.dim), dtype=complex)
    rho[np.ix_(centre, centre)] = ctx.random_state(len(centre), len(centre))
    rows.extend(_state_rows("e^(2L_sp) ρ", expL_sp(2.0, rho, params.mu, 0.3, 0.1, spin)))

    geo = TensorGeometry(SpinGeometry(12), FockGeometry(28))
    rho = _core_state(ctx, geo)
    for t in (0.5, 2.0):
        rows.extend(_state_rows(f"e^({t:g}L_OISD) ρ", expL_OISD_closed(t, rho, params, geo)))
    rows.extend(_state_rows(f"V({ctx.config.sigma:g}) ρ", v_transform(ctx.config.sigma, params, rho, geo)))
    return rows


def check_decomposition(ctx: CheckContext) -> List[Residual]:
    """Factorized e^{tL_ph} against the dense exponential and the integrated truncated generator."""
    params = ctx.params
    geo = FockGeometry(ctx.config.fock_cutoff)
    levels = _levels(geo, ctx.config)
    handle = build_L_ph(params, geo)
    generator = handle.superop.to_matrix()
    rho = ctx.random_state(geo.dim, 3)
    times = (0.1, 1.0, 5.0)
    trajectory = integrate_master(handle, rho, (0.0,) + times, ctx.config.tolerances())
    rows = []
    for t, state in zip(times, trajectory.states[1:]):
        closed = expL_ph(t, rho, params)
        dense = unvec(expm(t * generator) @ vec(rho), geo.dim)
        gap = trace_norm(_fock_window(closed - dense, levels))
        rows.append(Residual(f"e^(tL_ph) factorized = expm at t={t:g}", "decomposition", gap, gap, 1e-6))
        gap = trace_norm(_fock_window(closed - state.matrix, levels))
        rows.append(Residual(f"e^(tL_ph) factorized = ODE at t={t:g}", "decomposition", gap, gap, 1e-6))
    return rows


def check_gibbs(ctx: CheckContext) -> List[Residual]:
    params = ctx.params
    geo = ctx.fock
    gibbs = gibbs_state(params.omega, params.J, geo).matrix
    fixed = trace_norm(expL_ph(1.0, gibbs, params) - gibbs)
    vacuum = np.zeros((geo.dim, geo.dim), dtype=complex)
    vacuum[0, 0] = 1.0
    dressed = trace_norm(s_semigroup(tau(params.J), vacuum) - gibbs)
    rows = [
        Residual("e^(L_ph) ρ_G = ρ_G", "INVGibbs", fixed, fixed, 1e-8),
        Residual("S_τ |0⟩⟨0| = ρ_G", "INVGibbs", dressed, dressed, 1e-8),
    ]
    horizon = 20.0 / params.gamma
    worst = max(trace_norm(expL_ph(horizon, ctx.random_state(geo.dim, 4), params) - gibbs) for _ in range(5))
    rows.append(Residual("‖e^(tL_ph)ρ₀ - ρ_G‖₁ at t=20/γ", "toGibbs", worst, worst, 1e-6))
    return rows


def check_spectrum(ctx: CheckContext) -> List[Residual]:
    params = ctx.params.with_updates(J=0.0)
    table = oscillator_spectrum(params, FockGeometry(ctx.config.fock_cutoff))
    worst = float(table["deviation"].max())
    return [Residual("L_ph eigenvalues -iω(n-m) - γ(n+m), J=0", "L0eigen", worst, worst, 1e-7)]


def check_spin_statistics(ctx: CheckContext) -> List[Residual]:
    rows = []
    alpha_minus, alpha_plus = 0.3, 0.1
    for t in (0.2, 0.8, 2.0):
        dist = spin_coeffs(t, alpha_minus, alpha_plus, suggest_kmax(t, alpha_minus, alpha_plus))
        tolerance = 1e-10 + dist.deficit
        rows.append(Residual(f"c_k mean at t={t:g}", "meanvariance",
                             abs(dist.empirical_mean - dist.mean), 0.0, tolerance))
        rows.append(Residual(f"c_k variance at t={t:g}", "meanvariance",
                             abs(dist.empirical_variance - dist.variance), 0.0, tolerance))
    return rows


def check_spin_window(ctx: CheckContext) -> List[Residual]:
    """A drifting walk leaves a fixed spin window, alone and inside the coupled model."""
    geo = SpinGeometry(64)
    alpha_minus = 1.0
    rho = np.zeros((geo.dim, geo.dim), dtype=complex)
    rho[geo.index(0), geo.index(0)] = 1.0
    t = 30.0 / (2.0 * alpha_minus)
    out = expL_sp(t, rho, ctx.params.mu, alpha_minus, 0.0, geo)
    keep = np.abs(geo.values) <= 2
    population = float(np.real(np.trace(out[np.ix_(keep, keep)])))
    rows = [Residual("Tr[P_2 ρ(t)] at t = 30/2α", "slim", population, population, 1e-3)]

    # J = 0: the spin drifts at rate 2λγδ while the oscillator relaxes to its vacuum
    params = ctx.params.with_updates(J=0.0)
    tensor = TensorGeometry(SpinGeometry(32), FockGeometry(8))
    rho = np.zeros((tensor.dim, tensor.dim), dtype=complex)
    rho[tensor.flat_index(0, 0), tensor.flat_index(0, 0)] = 1.0
    t = OISD_WINDOW_JUMPS / (2.0 * params.induced_dissipation)
    population = window_population(expL_OISD_closed(t, rho, params, tensor), tensor, 1)
    rows.append(Residual(f"Tr[(P_1 ⊗ 1) e^(tL_OISD) ρ] at t={t:.4g}", "slim", population, population, 1e-3))
    return rows


def check_decoupling(ctx: CheckContext) -> List[Residual]:
    return verify_decoupling(ctx.params, ctx.geometry, ctx.config.sigma_sweep, ctx.config.margins(),
                             rng=ctx.rng).residuals


def check_decoupling_general(ctx: CheckContext) -> List[Residual]:
    params = ctx.params.with_updates(gamma_bar=ctx.params.gamma_bar or 0.1)
    report = verify_decoupling(params, ctx.geometry, [ctx.config.sigma], ctx.config.margins(),
                               general=True, rng=ctx.rng)
    return report.residuals


def check_decoupling_gamma0(ctx: CheckContext) -> List[Residual]:
    params = ModelParams(omega=1.0, mu=0.5, gamma=0.0, lam=0.3, gamma_bar=0.1, J=ctx.params.J)
    report = gamma_zero_transform(params, ctx.geometry, ctx.config.sigma, ctx.config.margins(), rng=ctx.rng)
    rows = list(report.residuals)
    expected = params.lam / (params.mu - params.omega)
    rows.append(Residual("W argument λ/(μ-ω)", "OPPO-V-TRANS-SPLIT",
                         abs(report.w_argument - expected), 0.0, 1e-15))
    return rows


def _core_state(ctx: CheckContext, geo: TensorGeometry) -> np.ndarray:
    """Random density matrix on spin |m| <= 1 and photons n <= 1."""
    keep = [geo.flat_index(m, n) for m in (-1, 0, 1) for n in (0, 1)]
    sub = ctx.random_state(len(keep), len(keep))
    rho = np.zeros((geo.dim, geo.dim), dtype=complex)
    rho[np.ix_(keep, keep)] = sub
    return rho


def _interior(x: np.ndarray, geo: TensorGeometry, margins) -> np.ndarray:
    keep = interior_mask(geo, *margins)
    return x[np.ix_(keep, keep)]


def check_product_formula(ctx: CheckContext) -> List[Residual]:
    params = ctx.params
    rows = []
    schedule = product_schedule(2.0, params)
    for name, value in schedule.residuals.items():
        rows.append(Residual(f"{name} schedule ODE residual at t=2", name, value, value, 1e-8))

    spin = min(ctx.config.spin_halfwidth, ODE_GEOMETRY_LIMIT)
    geo = TensorGeometry(SpinGeometry(spin), FockGeometry(ODE_FOCK_CUTOFF))
    margins = default_margins(geo)
    rho = _core_state(ctx, geo)
    generator = build_L_OISD(params, geo)
    times = (0.1, 1.0, 5.0)
    trajectory = integrate_master(generator, rho, (0.0,) + times, ctx.config.tolerances())
    for t, state in zip(times, trajectory.states[1:]):
        gap = trace_norm(_interior(expL_OISD_closed(t, rho, params, geo) - state.matrix, geo, margins))
        rows.append(Residual(f"product formula = ODE at t={t:g}", "prod_L", gap, gap, 1e-6))

    small = TensorGeometry(SpinGeometry(3), FockGeometry(5))
    rho_small = _core_state(ctx, small)
    handle = build_L_OISD(params, small)
    dense = unvec(expm(0.1 * handle.superop.to_matrix()) @ vec(rho_small), small.dim)
    closed = expL_OISD_closed(0.1, rho_small, params, small)
    gap = trace_norm(_interior(closed - dense, small, (1, 2)))
    rows.append(Residual("product formula = expm at t=0.1", "prod_L", gap, gap, 1e-6))
    integrated = integrate_master(handle, rho_small, [0.0, 0.1], ctx.config.tolerances()).states[-1].matrix
    gap = trace_norm(integrated - dense)
    rows.append(Residual("ODE = expm of the truncated L_OISD at t=0.1", "prod_L", gap, gap, 1e-7))

    composed = expL_OISD_closed(1.2, expL_OISD_closed(0.8, rho, params, geo), params, geo)
    law = trace_norm(_interior(composed - expL_OISD_closed(2.0, rho, params, geo), geo, margins))
    rows.append(Residual("product formula semigroup law 0.8 + 1.2", "prod_L", law, law, 1e-9))

    fd = generator_fd_check(lambda t, x: expL_OISD_closed(t, x, params, geo), generator, rho, ctx.config.fd_step)
    rows.append(Residual("d/dt product formula = L_OISD", "prod_L", fd, fd, 1e-5))
    return rows


def check_generators(ctx: CheckContext) -> List[Residual]:
    geo = ctx.fock
    _, a, adag, _ = build_fock(geo.cutoff)
    rho = ctx.random_state(geo.dim, 3)
    fd = generator_fd_check(lambda t, x: s_semigroup(t, x), D(adag, a), rho, ctx.config.fd_step)
    return [Residual("d/dt S_t = D(a†,a)", "3eq", fd, fd, 1e-5)]


def check_sync(ctx: CheckContext) -> List[Residual]:
    """
    Comparison experiment: synchronized identity, contraction bound and decay.

    Runs at J = 0, where V(σ)⁻¹ is bounded for every σ, with coupling
    SYNC_COUPLING on a SYNC_WIDTH x SYNC_WIDTH window.
    """
    params = ctx.params.with_updates(J=0.0, lam=SYNC_COUPLING)
    geo = TensorGeometry(SpinGeometry(SYNC_WIDTH), FockGeometry(SYNC_WIDTH))
    sigma = ctx.config.sigma
    rho0 = _core_state(ctx, geo)
    star, _ = rho_star(rho0, sigma, params, geo)
    start = comparison_state(0.0, star.matrix, sigma, params, geo)
    rows = []
    for t in (0.5, 2.0, 5.0):
        gap = trace_norm(expL_syn_dec(t, start, params, geo) - expL_OISD_closed(t, start, params, geo))
        name = f"e^(tL_syn) ρ̌(0) = e^(tL_OISD) ρ̌(0) at t={t:g}"
        rows.append(Residual(name, "TWO-LIUS-ONAJI", gap, gap, 1e-6))

    horizon = 20.0 / params.gamma
    table = prop2_experiment(rho0, params, sigma, np.linspace(0.0, horizon, 6), geo)
    excess = float(max(0.0, (table["distance"] - table["bound"]).max()))
    rows.append(Residual("‖ρ(t) - ρ̌(t)‖₁ <= contraction bound", "EST", excess, excess, 1e-6))
    final = float(table["distance"].iloc[-1])
    rows.append(Residual("‖ρ(t) - ρ̌(t)‖₁ at t=20/γ", "EST", final, final, 1e-3))
    limit = rho_star_limit_residual(rho0, sigma, params, geo)
    rows.append(Residual("‖(1⊗e^(TL_ph))V⁻¹ρ₀ - ρ★⊗ρ_G‖₁ at T=25/γ", "toastGIB", limit, limit, 1e-4))
    return rows


def check_finite_ell(ctx: CheckContext) -> List[Residual]:
    ells = sorted(ctx.config.ell_sweep)
    geo = TensorGeometry(SpinGeometry(max(ells)), FockGeometry(6))
    psi = np.zeros(geo.dim, dtype=complex)
    for m in (-1, 0, 1):
        psi[geo.flat_index(m, 1)] = 1.0
    psi /= np.linalg.norm(psi)
    table = finite_ell_demo(ells, ctx.params, 1.0, psi, geo)
    increases = np.diff(table["deviation"].to_numpy())
    worst = float(max(0.0, increases.max())) if increases.size else 0.0
    return [Residual(f"finite-ℓ deviation decreasing over ℓ = {ells}", "lSDHamiltonian", worst, worst, 0.0)]


CHECKS: Dict[str, Check] = {
    check.name: check
    for check in [
        Check("identities", "KK..KD0", "Superoperator commutation tables", check_identities),
        Check("kraus", "trace=1", "Kraus normalization of both oscillator semigroups", check_kraus),
        Check("semigroup", "3eq", "Semigroup law of S_t", check_semigroup),
        Check("generators", "3eq", "Finite-difference generator of S_t", check_generators),
        Check("propagator-states", "CP", "Trace and positivity after every propagator", check_propagator_states),
        Check("decomposition", "decomposition", "Factorized e^(tL_ph) against dense expm and ODE",
              check_decomposition),
        Check("gibbs", "INVGibbs", "Gibbs fixed point and convergence", check_gibbs),
        Check("spectrum", "L0eigen", "Eigenvalues of L_ph", check_spectrum),
        Check("spin-statistics", "meanvariance", "Mean and variance of c_k(t)", check_spin_statistics),
        Check("spin-window", "slim", "Spin window population decay", check_spin_window),
        Check("decoupling", "SPLIT", "L_OISD∘V = V∘L_decoupled over the σ sweep", check_decoupling),
        Check("decoupling-general", "GEN-V-TRANS-SPLIT", "General model with extra spin dissipation",
              check_decoupling_general),
        Check("decoupling-gamma0", "OPPO-V-TRANS-SPLIT", "Undamped oscillator transform", check_decoupling_gamma0),
        Check("product-formula", "prod_L", "Closed-form OISD propagator against ODE integration and expm",
              check_product_formula, slow=True),
        Check("sync", "TWO-LIUS-ONAJI", "Synchronized identity, contraction bound and ρ★ limit", check_sync,
              slow=True),
        Check("finite-ell", "lSDHamiltonian", "Finite-ℓ Dicke convergence", check_finite_ell),
    ]
}


def select_checks(names: Optional[Sequence[str]] = None) -> List[Check]:
    """Checks by name, in manifest order; all of them when ``names`` is empty."""
    if not names:
        return list(CHECKS.values())
    unknown = [name for name in names if name not in CHECKS]
    if unknown:
        raise InvalidParameterError(f"unknown checks {unknown}; available: {list(CHECKS)}")
    return [check for name, check in CHECKS.items() if name in names]


def run_checks(config: RunConfig, names: Optional[Sequence[str]] = None) -> List[Residual]:
    """Run the selected checks and return every residual row."""
    ctx = CheckContext(config)
    rows: List[Residual] = []
    for check in select_checks(names):
        logger.info(f"Running check {check.name}: {check.description}")
        results = check.runner(ctx)
        failed = [r.name for r in results if not r.passed]
        if failed:
            logger.warning(f"Check {check.name}: {len(failed)} rows above tolerance: {failed}")
        rows.extend(results)
    return rows


__all__ = ["Check", "CheckContext", "CHECKS", "select_checks", "run_checks"]
