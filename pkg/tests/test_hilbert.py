"""
Unit Tests for Truncated Spaces

Ladder operators, shift spin, tensor ordering and partial traces.
"""
import numpy as np
import pytest

from src.hilbert.partial_trace import partial_trace_fock, partial_trace_spin
from src.hilbert.spaces import (
    DensityMatrix,
    FockGeometry,
    Operator,
    SpinGeometry,
    SpinScheme,
    TensorGeometry,
    build_fock,
    build_spin,
    default_margins,
    interior_mask,
    tensor_embed,
)
from src.utils.errors import InvalidParameterError


class TestFock:
    """Test the truncated oscillator."""

    def test_ladder_action(self):
        geo, a, adag, n_op = build_fock(6)
        assert geo.dim == 7
        assert a.matrix[2, 3] == pytest.approx(np.sqrt(3))
        assert adag.matrix[3, 2] == pytest.approx(np.sqrt(3))
        assert np.allclose(np.diag(n_op.matrix), np.arange(7))

    def test_top_level_is_annihilated_by_raising(self):
        _, _, adag, _ = build_fock(5)
        top = np.zeros(6)
        top[5] = 1.0
        assert np.allclose(adag.matrix @ top, 0.0)

    def test_canonical_commutator_holds_below_cutoff(self):
        _, a, adag, _ = build_fock(8)
        ccr = a.commutator(adag).matrix
        assert np.allclose(ccr[:8, :8], np.eye(8))
        assert ccr[8, 8] == pytest.approx(-8.0)

    @pytest.mark.parametrize("cutoff", [0, -3, 2.5])
    def test_rejects_bad_cutoff(self, cutoff):
        with pytest.raises(InvalidParameterError):
            FockGeometry(cutoff)


class TestSpin:
    """Test the shift-operator spin space."""

    def test_hard_shifts_keep_number_commutator(self):
        _, l_plus, l_minus, m_op = build_spin(5)
        assert np.allclose(m_op.commutator(l_plus).matrix, l_plus.matrix)
        assert np.allclose(m_op.commutator(l_minus).matrix, -l_minus.matrix)

    def test_hard_shift_drops_top_state(self):
        geo, l_plus, _, _ = build_spin(3)
        top = np.zeros(geo.dim)
        top[geo.index(3)] = 1.0
        assert np.allclose(l_plus.matrix @ top, 0.0)

    def test_raising_moves_up_one(self):
        geo, l_plus, _, _ = build_spin(3)
        state = np.zeros(geo.dim)
        state[geo.index(-1)] = 1.0
        out = l_plus.matrix @ state
        assert out[geo.index(0)] == 1.0

    def test_cyclic_shifts_are_unitary(self):
        geo, l_plus, l_minus, _ = build_spin(4, SpinScheme.CYCLIC)
        assert np.allclose((l_plus @ l_minus).matrix, np.eye(geo.dim))
        assert np.allclose((l_minus @ l_plus).matrix, np.eye(geo.dim))

    def test_index_out_of_range(self):
        with pytest.raises(InvalidParameterError):
            SpinGeometry(2).index(3)


class TestTensor:
    """Test spin-major ordering and embeddings."""

    def test_flat_index_is_spin_major(self):
        geo = TensorGeometry(SpinGeometry(2), FockGeometry(3))
        assert geo.flat_index(-2, 0) == 0
        assert geo.flat_index(-2, 3) == 3
        assert geo.flat_index(-1, 0) == 4
        assert geo.flat_index(2, 3) == geo.dim - 1

    def test_embed_matches_kron(self):
        geo = TensorGeometry(SpinGeometry(2), FockGeometry(3))
        _, l_plus, _, _ = build_spin(2)
        _, a, _, _ = build_fock(3)
        assert np.allclose(tensor_embed(l_plus, a, geo).matrix, np.kron(l_plus.matrix, a.matrix))
        assert np.allclose(tensor_embed(None, a, geo).matrix, np.kron(np.eye(5), a.matrix))

    def test_embed_rejects_mismatched_factor(self):
        geo = TensorGeometry(SpinGeometry(2), FockGeometry(3))
        _, a, _, _ = build_fock(4)
        with pytest.raises(InvalidParameterError):
            tensor_embed(None, a, geo)

    def test_operator_geometry_mismatch(self):
        x = Operator(FockGeometry(2), np.eye(3))
        y = Operator(SpinGeometry(1), np.eye(3))
        with pytest.raises(InvalidParameterError):
            x @ y

    def test_interior_mask_and_default_margins(self):
        geo = TensorGeometry(SpinGeometry(8), FockGeometry(8))
        assert default_margins(geo) == (2, 2)
        mask = interior_mask(geo, 2, 2)
        assert mask.sum() == 13 * 7
        assert mask[geo.flat_index(0, 0)]
        assert not mask[geo.flat_index(8, 0)]
        assert not mask[geo.flat_index(0, 8)]

    def test_interior_mask_rejects_large_margin(self):
        with pytest.raises(InvalidParameterError):
            interior_mask(FockGeometry(4), 0, 4)


class TestPartialTrace:
    """Test marginals of product and correlated states."""

    def test_product_state_marginals(self, rng):
        geo = TensorGeometry(SpinGeometry(1), FockGeometry(2))
        spin = np.diag([0.2, 0.5, 0.3]).astype(complex)
        fock = np.diag([0.6, 0.3, 0.1]).astype(complex)
        rho = DensityMatrix(geo, np.kron(spin, fock))
        assert np.allclose(partial_trace_fock(rho).matrix, spin)
        assert np.allclose(partial_trace_spin(rho).matrix, fock)
        assert partial_trace_fock(rho).geometry == geo.spin

    def test_marginals_preserve_trace(self, rng):
        geo = TensorGeometry(SpinGeometry(2), FockGeometry(3))
        g = rng.standard_normal((geo.dim, geo.dim))
        rho = DensityMatrix(geo, g @ g.T)
        assert np.trace(partial_trace_fock(rho).matrix) == pytest.approx(np.trace(rho.matrix))
        assert np.trace(partial_trace_spin(rho).matrix) == pytest.approx(np.trace(rho.matrix))

    def test_needs_tensor_geometry(self):
        with pytest.raises(InvalidParameterError):
            partial_trace_fock(DensityMatrix(FockGeometry(2), np.eye(3) / 3))
