"""
Unit Tests for Models

Parameter validation, Liouvillian builders, decoupling residuals, the
comparison experiment, Gibbs convergence, finite-ℓ Hamiltonians and spectra.
"""
from unittest.mock import patch

import numpy as np
import pytest
from pydantic import ValidationError

from src.hilbert.spaces import DensityMatrix, FockGeometry, SpinGeometry, TensorGeometry
from src.models.decoupling import DECOUPLING_TOLERANCE, gamma_zero_transform, verify_decoupling
from src.models.experiments import (
    ODE_GEOMETRY_LIMIT,
    expL_syn_dec,
    finite_ell_demo,
    gibbs_convergence,
    prop2_experiment,
    rho_star,
    rho_star_limit_residual,
    window_population,
)
from src.models.liouvillians import (
    LiouvillianLabel,
    build_H,
    build_H_ell,
    build_L_decoupled,
    build_L_OISD,
    build_L_ph,
    build_L_sp,
    build_L_syn_dec,
    decoupled_spin_rates,
    ell_ladder,
)
from src.models.params import ModelParams
from src.models.spectrum import COLUMNS, oscillator_spectrum, spectrum_table, spin_spectrum
from src.numerics.fd import generator_fd_check
from src.numerics.linalg import trace_norm
from src.propagators.oscillator import gibbs_state
from src.propagators.transforms import v_transform
from src.utils.errors import CrossCheckError, IllConditionedError, InvalidParameterError
from tests.conftest import core_density, random_density


class TestModelParams:
    """Test parameter validation."""

    def test_lambda_alias(self):
        assert ModelParams(**{"lambda": 0.4}).lam == 0.4
        assert ModelParams(lam=0.4).lam == 0.4

    @pytest.mark.parametrize("field, value", [("omega", 0.0), ("mu", -1.0), ("gamma", -0.1), ("J", -0.5)])
    def test_rejects_out_of_range(self, field, value):
        with pytest.raises(ValidationError):
            ModelParams(**{field: value})

    def test_frozen(self, params):
        with pytest.raises(ValidationError):
            params.omega = 2.0

    def test_with_updates_revalidates(self, params):
        assert params.with_updates(lam=0.5).lam == 0.5
        with pytest.raises(ValidationError):
            params.with_updates(omega=-1.0)

    def test_derived_constants(self):
        params = ModelParams(omega=1.0, mu=0.7, gamma=0.3, lam=0.2)
        assert params.detuning == pytest.approx(0.3)
        assert params.delta == pytest.approx(0.2 / 0.18)
        assert params.induced_dissipation == pytest.approx(0.2 * 0.3 * 0.2 / 0.18)

    def test_delta_undefined_on_resonance_without_damping(self):
        with pytest.raises(InvalidParameterError):
            ModelParams(omega=0.7, mu=0.7, gamma=0.0).delta

    def test_beta(self):
        assert ModelParams(J=0.0).beta == float("inf")
        assert np.exp(-ModelParams(J=0.5).beta) == pytest.approx(0.5 / 1.5)


class TestLiouvillians:
    """Test the generator builders."""

    def test_labels(self, params, tensor_geo):
        assert build_L_OISD(params, tensor_geo).label is LiouvillianLabel.L_OISD
        assert build_H(params, tensor_geo).label.is_unitary
        assert not build_L_decoupled(params, tensor_geo).label.is_unitary

    def test_L_ph_needs_dissipation(self, params, small_fock):
        with pytest.raises(InvalidParameterError):
            build_L_ph(params.with_updates(gamma=0.0), small_fock)

    def test_L_ph_on_vacuum(self, params, small_fock):
        vacuum = np.zeros((small_fock.dim, small_fock.dim))
        vacuum[0, 0] = 1.0
        out = build_L_ph(params, small_fock).apply(vacuum)
        assert out[1, 1] == pytest.approx(2 * params.gamma * params.J)
        assert out[0, 0] == pytest.approx(-2 * params.gamma * params.J)

    def test_L_sp_lifts_to_tensor(self, rng):
        params = ModelParams(alpha_minus=0.3, alpha_plus=0.1)
        geo = TensorGeometry(SpinGeometry(3), FockGeometry(2))
        spin, fock = random_density(rng, 7, 3), random_density(rng, 3, 3)
        lifted = build_L_sp(params, geo).apply(np.kron(spin, fock))
        assert np.allclose(lifted, np.kron(build_L_sp(params, geo.spin).apply(spin), fock))

    def test_decoupled_spin_rates(self, params):
        rate = params.induced_dissipation
        assert decoupled_spin_rates(params) == pytest.approx((rate * (params.J + 1), rate * params.J))
        general = params.with_updates(gamma_bar=0.1)
        assert decoupled_spin_rates(general)[1] == pytest.approx((rate + 0.1) * params.J)

    def test_syn_dec_generates_its_propagator(self, params, rng, tensor_geo):
        rho = core_density(rng, tensor_geo)
        handle = build_L_syn_dec(params, tensor_geo)
        assert generator_fd_check(lambda t, x: expL_syn_dec(t, x, params, tensor_geo), handle, rho) < 1e-5

    def test_ell_ladder(self):
        geo = SpinGeometry(4)
        j_plus, j_minus = ell_ladder(2, geo)
        assert j_plus.matrix[geo.index(1), geo.index(0)] == pytest.approx(np.sqrt(6) / 2)
        assert np.allclose(j_plus.matrix[:, geo.index(3)], 0.0)
        assert np.allclose(j_minus.matrix, j_plus.matrix.T)

    @pytest.mark.parametrize("ell", [0, 5])
    def test_ell_out_of_range(self, ell):
        with pytest.raises(InvalidParameterError):
            ell_ladder(ell, SpinGeometry(4))

    def test_H_ell_is_hermitian(self, params):
        geo = TensorGeometry(SpinGeometry(4), FockGeometry(3))
        hamiltonian = build_H_ell(3, params, geo).hamiltonian.matrix
        assert np.allclose(hamiltonian, hamiltonian.conj().T)


class TestDecoupling:
    """Test L∘V(σ) = V(σ)∘L_decoupled."""

    @pytest.mark.slow
    def test_core_model(self, params, rng, decoupling_geo):
        report = verify_decoupling(params, decoupling_geo, rng=rng)
        assert report.passed
        assert report.sigmas == [0.3, 0.5, 1.0]
        assert report.worst < DECOUPLING_TOLERANCE
        assert report.spin_dissipation == pytest.approx(params.induced_dissipation)

    @pytest.mark.slow
    def test_general_model(self, params, rng, decoupling_geo):
        general = params.with_updates(gamma_bar=0.1)
        report = verify_decoupling(general, decoupling_geo, sigmas=(0.5,), general=True, rng=rng)
        assert report.passed
        assert report.residuals[0].tag == "GEN-V-TRANS-SPLIT"
        assert report.spin_dissipation == pytest.approx(params.induced_dissipation + 0.1)

    @pytest.mark.slow
    def test_undamped_oscillator(self, rng, decoupling_geo):
        params = ModelParams(omega=1.0, mu=0.5, gamma=0.0, lam=0.3, gamma_bar=0.1)
        report = gamma_zero_transform(params, decoupling_geo, rng=rng)
        assert report.w_argument == pytest.approx(-0.6)
        assert report.oscillator_dissipation == 0.0
        assert report.passed

    def test_wrong_decoupled_generator_is_detected(self, params, rng, tensor_geo):
        def shifted(p, geo):
            return build_L_decoupled(p.with_updates(omega=p.omega + 0.5), geo)

        with patch("src.models.decoupling.build_L_decoupled", side_effect=shifted):
            report = verify_decoupling(params, tensor_geo, sigmas=(0.5,), rng=rng)
        assert not report.passed
        assert report.worst > 1e-3

    def test_undamped_transform_needs_gamma_zero(self, params, tensor_geo):
        with pytest.raises(InvalidParameterError):
            gamma_zero_transform(params, tensor_geo)

    def test_undamped_transform_needs_detuning(self, tensor_geo):
        with pytest.raises(InvalidParameterError):
            gamma_zero_transform(ModelParams(omega=0.7, mu=0.7, gamma=0.0), tensor_geo)

    def test_rejects_bad_sigma(self, params, tensor_geo):
        with pytest.raises(InvalidParameterError):
            verify_decoupling(params, tensor_geo, sigmas=(0.0,))


class TestExperiments:
    """Test ρ★, the comparison experiment and the demos."""

    @pytest.fixture
    def weak(self):
        """Zero temperature and weak coupling, where V(σ)⁻¹ is bounded for every σ."""
        return ModelParams().with_updates(J=0.0, lam=0.05)

    @staticmethod
    def spin_state(rng, geo: TensorGeometry) -> np.ndarray:
        centre = [geo.spin.index(m) for m in (-1, 0, 1)]
        chi = np.zeros((geo.spin.dim, geo.spin.dim), dtype=complex)
        chi[np.ix_(centre, centre)] = random_density(rng, 3, 3)
        return chi

    def test_rho_star_is_normalized(self, weak, rng):
        geo = TensorGeometry(SpinGeometry(8), FockGeometry(8))
        rho0 = DensityMatrix(geo, core_density(rng, geo))
        star, report = rho_star(rho0, 0.5, weak, geo)
        assert star.geometry == geo.spin
        assert np.trace(star.matrix).real == pytest.approx(1.0)
        assert np.allclose(star.matrix, star.matrix.conj().T)
        assert report.trace_defect < 1e-12
        assert report.min_eigenvalue > -1e-6

    def test_rho_star_recovers_spin_factor(self, params, rng, tensor_geo):
        chi = self.spin_state(rng, tensor_geo)
        gibbs = gibbs_state(params.omega, params.J, tensor_geo.fock).matrix
        rho0 = v_transform(0.3, params, np.kron(chi, gibbs), tensor_geo)
        star, _ = rho_star(rho0, 0.3, params, tensor_geo)
        assert trace_norm(star.matrix - chi) < 1e-7

    def test_rho_star_without_coupling(self, params, rng, tensor_geo):
        uncoupled = params.with_updates(lam=0.0)
        chi = self.spin_state(rng, tensor_geo)
        photons = np.zeros((tensor_geo.fock.dim, tensor_geo.fock.dim), dtype=complex)
        photons[1, 1] = 1.0
        star, _ = rho_star(np.kron(chi, photons), 0.3, uncoupled, tensor_geo)
        assert trace_norm(star.matrix - chi) < 1e-12

    def test_rho_star_limit_residual(self, weak, rng):
        geo = TensorGeometry(SpinGeometry(12), FockGeometry(12))
        rho0 = DensityMatrix(geo, core_density(rng, geo))
        assert rho_star_limit_residual(rho0, 0.5, weak, geo) <= 1e-4

    @pytest.mark.parametrize("width", [8, 16])
    def test_unbounded_inverse_is_refused(self, params, rng, width):
        geo = TensorGeometry(SpinGeometry(width), FockGeometry(width))
        rho0 = DensityMatrix(geo, core_density(rng, geo))
        with pytest.raises(IllConditionedError):
            rho_star(rho0, 0.5, params, geo)
        with pytest.raises(IllConditionedError):
            prop2_experiment(rho0, params, 0.5, [0.0, 20.0 / params.gamma], geo)

    def test_non_positive_marginal_is_refused(self, weak, tensor_geo):
        weights = np.zeros(tensor_geo.spin.dim)
        weights[[5, 6, 7]] = [0.6, 0.6, -0.2]
        vacuum = np.zeros((tensor_geo.fock.dim, tensor_geo.fock.dim))
        vacuum[0, 0] = 1.0
        broken = np.kron(np.diag(weights), vacuum).astype(complex)
        with patch("src.models.experiments.v_inverse", return_value=broken):
            with pytest.raises(IllConditionedError, match="min eigenvalue"):
                rho_star(np.eye(tensor_geo.dim) / tensor_geo.dim, 0.5, weak, tensor_geo)

    def test_window_population(self, rng, tensor_geo):
        rho = core_density(rng, tensor_geo)
        assert window_population(rho, tensor_geo, 1) == pytest.approx(1.0)
        assert window_population(rho, tensor_geo, 0) < 1.0

    @pytest.mark.slow
    def test_comparison_experiment(self, weak, rng):
        geo = TensorGeometry(SpinGeometry(12), FockGeometry(12))
        rho0 = DensityMatrix(geo, core_density(rng, geo))
        frame = prop2_experiment(rho0, weak, 0.5, np.linspace(0.0, 20.0 / weak.gamma, 4), geo)
        assert list(frame.columns) == [
            "t",
            "distance",
            "bound",
            "window_population",
            "sync_gap",
            "rho_star_min_eigenvalue",
        ]
        assert (frame["distance"] <= frame["bound"] + 1e-6).all()
        assert frame["distance"].iloc[-1] < 1e-3
        assert frame["sync_gap"].max() < 1e-6
        assert "fitted_rate" in frame.attrs

    def test_comparison_without_coupling(self, rng, tensor_geo):
        uncoupled = ModelParams().with_updates(J=0.0, lam=0.0)
        chi = self.spin_state(rng, tensor_geo)
        vacuum = np.zeros((tensor_geo.fock.dim, tensor_geo.fock.dim), dtype=complex)
        vacuum[0, 0] = 1.0
        rho0 = DensityMatrix(tensor_geo, np.kron(chi, vacuum))
        frame = prop2_experiment(rho0, uncoupled, 0.5, [0.0, 5.0, 20.0], tensor_geo)
        assert frame["distance"].max() <= 1e-9

    def test_ode_cross_check(self, weak, rng):
        geo = TensorGeometry(SpinGeometry(8), FockGeometry(8))
        rho0 = DensityMatrix(geo, core_density(rng, geo))
        frame = prop2_experiment(rho0, weak, 0.5, [0.0, 0.5, 1.0], geo, ode_check=True)
        assert frame["ode_distance"].max() < 1e-6

    def test_ode_cross_check_skipped_on_wide_geometry(self, weak, rng):
        geo = TensorGeometry(SpinGeometry(ODE_GEOMETRY_LIMIT + 1), FockGeometry(8))
        rho0 = DensityMatrix(geo, core_density(rng, geo))
        frame = prop2_experiment(rho0, weak, 0.5, [0.0, 1.0], geo, ode_check=True)
        assert "ode_distance" not in frame.columns

    def test_ode_disagreement_raises(self, weak, rng):
        geo = TensorGeometry(SpinGeometry(8), FockGeometry(8))
        rho0 = DensityMatrix(geo, core_density(rng, geo))
        with patch("src.models.experiments._ode_distances", return_value=np.array([0.0, 1e-3])):
            with pytest.raises(CrossCheckError) as exc_info:
                prop2_experiment(rho0, weak, 0.5, [0.0, 1.0], geo, ode_check=True)
        assert exc_info.value.gap == pytest.approx(1e-3)

    def test_gibbs_convergence(self, params, rng, fock_geo):
        rho0 = random_density(rng, fock_geo.dim, 4)
        frame = gibbs_convergence(params, rho0, [0.0, 5.0, 20.0 / params.gamma], fock_geo)
        assert frame["distance"].iloc[-1] < 1e-6
        assert (frame["distance"] <= frame["bound"] * (1 + 1e-12)).all()
        assert frame.attrs["fitted_constant"] > 0

    def test_finite_ell_deviation_decreases(self, params):
        geo = TensorGeometry(SpinGeometry(16), FockGeometry(4))
        psi = np.zeros(geo.dim, dtype=complex)
        for m in (-1, 0, 1):
            psi[geo.flat_index(m, 1)] = 1.0
        psi /= np.linalg.norm(psi)
        frame = finite_ell_demo([4, 8, 16], params, 1.0, psi, geo)
        assert list(frame["ell"]) == [4, 8, 16]
        assert frame["deviation"].is_monotonic_decreasing

    def test_finite_ell_rejects_wrong_state(self, params, tensor_geo):
        with pytest.raises(InvalidParameterError):
            finite_ell_demo([2], params, 1.0, np.ones(3), tensor_geo)


class TestSpectrum:
    """Test the spectrum tables."""

    def test_oscillator_labels_at_zero_temperature(self):
        params = ModelParams(omega=1.0, gamma=0.5, J=0.0)
        frame = oscillator_spectrum(params, FockGeometry(8), levels=4)
        assert list(frame.columns) == COLUMNS
        assert len(frame) == 25
        row = frame[(frame["n"] == 2) & (frame["m"] == 1)].iloc[0]
        assert complex(row["analytic_real"], row["analytic_imag"]) == pytest.approx(-1j - 1.5)
        assert frame["deviation"].max() < 1e-7

    def test_spin_factor(self, params):
        frame = spin_spectrum(params, SpinGeometry(6), window=2)
        assert set(frame["factor"]) == {"spin"}
        assert frame["deviation"].max() < 1e-12

    def test_table_concatenates_factors(self):
        params = ModelParams(J=0.0)
        frame = spectrum_table(params, FockGeometry(6), SpinGeometry(4))
        assert list(frame["factor"].unique()) == ["oscillator", "spin"]
