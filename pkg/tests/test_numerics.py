"""
Unit Tests for the Numerical Oracles

Dense expm cap, trace norm, density checks, the master-equation
integrator and the finite-difference generator check.
"""
from unittest.mock import patch

import numpy as np
import pytest

from src.config import ToleranceConfig
from src.hilbert.spaces import DensityMatrix, FockGeometry
from src.models.liouvillians import build_L_ph
from src.numerics.fd import generator_fd_check
from src.numerics.integrator import integrate_master
from src.numerics.linalg import check_density, expm, require_density, trace_norm
from src.propagators.oscillator import expL_ph
from src.superop.algebra import unvec, vec
from src.utils.errors import DensityViolationError, InvalidParameterError, ResourceLimitError, StiffnessError
from tests.conftest import random_density


class TestLinalg:
    """Test dense helpers."""

    def test_trace_norm_of_non_hermitian(self):
        x = np.array([[0.0, 2.0], [0.0, 0.0]])
        assert trace_norm(x) == pytest.approx(2.0)

    def test_trace_norm_of_state_is_one(self, rng):
        assert trace_norm(random_density(rng, 5, 5)) == pytest.approx(1.0)

    def test_expm_cap(self):
        with patch("src.numerics.linalg.settings") as mock_settings:
            mock_settings.dense_matrix_limit = 3
            with pytest.raises(ResourceLimitError):
                expm(np.zeros((4, 4)))

    def test_expm_rejects_non_square(self):
        with pytest.raises(InvalidParameterError):
            expm(np.zeros((2, 3)))


class TestDensityCheck:
    """Test the density validator."""

    def test_valid_state(self, rng):
        report = check_density(random_density(rng, 4, 4), geometry=FockGeometry(3))
        assert report.passed
        assert report.state is not None

    def test_negative_eigenvalue(self):
        report = check_density(np.diag([1.5, -0.5]))
        assert not report.passed
        assert report.min_eigenvalue == pytest.approx(-0.5)

    def test_hermiticity_has_its_own_tolerance(self):
        rho = np.diag([0.5, 0.5]).astype(complex)
        rho[0, 1] = 1e-11
        assert not check_density(rho).passed
        report = check_density(rho, ToleranceConfig(herm_tol=1e-10))
        assert report.passed
        assert report.hermiticity_defect == pytest.approx(1e-11)

    def test_require_density_raises_with_report(self):
        with pytest.raises(DensityViolationError) as exc_info:
            require_density(DensityMatrix(FockGeometry(1), np.diag([2.0, 0.0])))
        assert exc_info.value.report["trace_defect"] == pytest.approx(1.0)


class TestIntegrator:
    """Test integrate_master against the closed-form oscillator channel."""

    def test_matches_expL_ph(self, params, rng):
        geo = FockGeometry(24)
        rho = random_density(rng, geo.dim, 3)
        trajectory = integrate_master(build_L_ph(params, geo), rho, [0.0, 0.5, 1.0])
        assert len(trajectory.states) == 3
        gap = trajectory.states[-1].matrix - expL_ph(1.0, rho, params)
        assert trace_norm(gap[:18, :18]) < 1e-6
        frame = trajectory.to_frame()
        assert list(frame.columns) == ["t", "nfev", "trace_drift", "min_eigenvalue"]
        assert frame["min_eigenvalue"].min() > -1e-8

    def test_rejects_decreasing_grid(self, params):
        geo = FockGeometry(4)
        with pytest.raises(InvalidParameterError):
            integrate_master(build_L_ph(params, geo), np.eye(5) / 5, [1.0, 0.5])

    def test_stiffness_is_reported(self, params):
        geo = FockGeometry(4)

        class Stalled:
            def __init__(self, fun, t0, y0, t_bound, rtol, atol):
                self.status, self.t = "running", t0

            def step(self):
                self.status = "failed"
                return "Required step size is less than spacing between numbers."

        with patch.dict("src.numerics.integrator.SOLVERS", {"DOP853": Stalled}):
            with pytest.raises(StiffnessError, match="expm"):
                integrate_master(build_L_ph(params, geo), np.eye(5) / 5, [0.0, 1.0])

    def test_states_are_hermitian(self, params, rng):
        geo = FockGeometry(8)
        rho = random_density(rng, geo.dim, 3)
        trajectory = integrate_master(build_L_ph(params, geo), rho, [0.0, 0.3, 2.0])
        for state in trajectory.states[1:]:
            assert np.array_equal(state.matrix, state.matrix.conj().T)

    @pytest.mark.parametrize("method", ["RK45", "RK23"])
    def test_other_solvers(self, params, rng, method):
        geo = FockGeometry(6)
        rho = random_density(rng, geo.dim, 2)
        handle = build_L_ph(params, geo)
        reference = integrate_master(handle, rho, [0.0, 0.5]).states[-1].matrix
        other = integrate_master(handle, rho, [0.0, 0.5], method=method).states[-1].matrix
        assert trace_norm(other - reference) < 1e-6

    def test_unknown_solver(self, params):
        with pytest.raises(InvalidParameterError, match="LSODA"):
            integrate_master(build_L_ph(params, FockGeometry(4)), np.eye(5) / 5, [0.0, 1.0], method="LSODA")

    def test_dense_and_integrator_agree(self, params, rng):
        geo = FockGeometry(6)
        rho = random_density(rng, geo.dim, 2)
        handle = build_L_ph(params, geo)
        dense = unvec(expm(0.7 * handle.superop.to_matrix()) @ vec(rho), geo.dim)
        trajectory = integrate_master(handle, rho, [0.0, 0.7], ToleranceConfig(ode_rel=1e-10, ode_abs=1e-12))
        assert trace_norm(trajectory.states[-1].matrix - dense) < 1e-7


class TestGeneratorCheck:
    """Test the finite-difference generator check."""

    def test_exact_generator(self, params, rng):
        geo = FockGeometry(24)
        rho = random_density(rng, geo.dim, 3)
        handle = build_L_ph(params, geo)
        assert generator_fd_check(lambda t, x: expL_ph(t, x, params), handle, rho) < 1e-5

    def test_wrong_generator_is_detected(self, params, rng):
        geo = FockGeometry(24)
        rho = random_density(rng, geo.dim, 3)
        wrong = build_L_ph(params.with_updates(omega=2.0), geo)
        assert generator_fd_check(lambda t, x: expL_ph(t, x, params), wrong, rho) > 1e-2
