import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from iontraj.hilbert import HilbertError, HilbertLayout, QuantumState, embed, expectation, ladder, pauli, pbar
from iontraj.states import (
    Coherent,
    Fock,
    GaussianMomentum,
    Spinor,
    StateError,
    coherent,
    gaussian_momentum,
    momentum_eigenbasis,
    product,
    required_coherent_dim,
    spinor,
    to_density,
)

# golden values for the dim-60 packet, frozen from the implementation and
# checked independently below against a dense eigh of pbar
GOLDEN_P_MEAN = 1.999153712562714
GOLDEN_P_VAR = 0.0999869869120329

thetas = st.complex_numbers(max_magnitude=2.0, allow_nan=False, allow_infinity=False)


class TestCoherent:
    def test_zero_is_vacuum(self):
        np.testing.assert_array_equal(coherent(0.0, 5), [1, 0, 0, 0, 0])

    def test_vacuum_weight(self):
        assert abs(coherent(1.0, 15)[0]) ** 2 == pytest.approx(math.exp(-1), abs=1e-10)

    @given(thetas)
    @settings(max_examples=40)
    def test_eigenstate_of_a(self, theta):
        dim = required_coherent_dim(theta) + 5
        psi = coherent(theta, dim)
        a = ladder(dim)[0].data
        assert np.linalg.norm(a @ psi - theta * psi) < 1e-6
        assert np.linalg.norm(psi) == pytest.approx(1.0)

    def test_truncation_guard(self):
        with pytest.raises(StateError, match="needs dim"):
            coherent(3.0, 8)

    def test_cutoff_projects_and_renormalizes(self):
        psi = coherent(1.0, 15, cutoff=2)
        assert np.all(psi[3:] == 0)
        assert np.linalg.norm(psi) == pytest.approx(1.0)
        ref = np.array([1, 1, 1 / math.sqrt(2)])
        np.testing.assert_allclose(psi[:3], ref / np.linalg.norm(ref))

    def test_phase(self):
        psi = coherent(1j, 16)
        assert psi[1] / psi[0] == pytest.approx(1j)


class TestGaussian:
    def test_golden_moments(self):
        psi = gaussian_momentum(2.0, 0.1, 60)
        P = pbar(60).data
        mean = np.vdot(psi, P @ psi).real
        var = np.vdot(psi, P @ P @ psi).real - mean**2
        assert mean == pytest.approx(GOLDEN_P_MEAN, abs=1e-10)
        assert var == pytest.approx(GOLDEN_P_VAR, abs=1e-10)

    def test_moments_against_dense_eigh(self):
        # independent: Gaussian weights over eigh(pbar), phases irrelevant to moments
        lam, _ = np.linalg.eigh(pbar(60).data)
        w = np.exp(-((lam - 2.0) ** 2) / 0.2)
        w /= w.sum()
        mean = w @ lam
        assert mean == pytest.approx(GOLDEN_P_MEAN, abs=1e-10)
        assert w @ lam**2 - mean**2 == pytest.approx(GOLDEN_P_VAR, abs=1e-10)

    @given(st.floats(min_value=-2.5, max_value=2.5), st.floats(min_value=0.05, max_value=0.5))
    @settings(max_examples=25, deadline=None)
    def test_parity(self, p0, mu):
        a = gaussian_momentum(p0, mu, 60)
        b = gaussian_momentum(-p0, mu, 60)
        # parity (-1)^n maps pbar -> -pbar
        np.testing.assert_allclose((-1.0) ** np.arange(60) * a, b, atol=1e-10)

    def test_starts_centred_in_position(self):
        psi = gaussian_momentum(1.0, 0.1, 60)
        x = ladder(60)[0].data + ladder(60)[1].data
        assert abs(np.vdot(psi, x @ psi)) < 1e-8

    def test_eigenbasis_orthonormal(self):
        lam, V = momentum_eigenbasis(30)
        np.testing.assert_allclose(V.conj().T @ V, np.eye(30), atol=1e-12)
        np.testing.assert_allclose(V.conj().T @ pbar(30).data @ V, np.diag(lam), atol=1e-10)
        assert not V.flags.writeable

    def test_edge_guard(self):
        with pytest.raises(StateError, match="too small"):
            gaussian_momentum(4.0, 0.5, 12)

    def test_width_positive(self):
        with pytest.raises(StateError):
            gaussian_momentum(0.0, 0.0, 30)


class TestSpinor:
    @pytest.mark.parametrize("phi,sy", [(math.pi / 2, 1.0), (-math.pi / 2, -1.0)])
    def test_sigma_y_eigenstates(self, phi, sy):
        v = spinor(1, 1, phi)
        assert np.vdot(v, pauli("y").data @ v).real == pytest.approx(sy)

    def test_up(self):
        v = spinor(1, 0)
        assert np.vdot(v, pauli("z").data @ v).real == 1.0

    @given(st.floats(0, 5), st.floats(0, 5), st.floats(-math.pi, math.pi))
    def test_normalized(self, a, b, phi):
        if a == 0 and b == 0:
            with pytest.raises(StateError):
                spinor(a, b, phi)
            return
        assert np.linalg.norm(spinor(a, b, phi)) == pytest.approx(1.0)


class TestProduct:
    def test_layout_order_and_defaults(self):
        lay = HilbertLayout.standard({"x": 3, "y": 2})
        s = product({"x": Fock(1)}, lay)
        expected = np.zeros(12)
        expected[(1 * 2 + 0) * 2 + 0] = 1
        np.testing.assert_array_equal(s.data, expected)

    def test_purity_and_trace(self):
        lay = HilbertLayout.standard({"x": 12})
        s = product({"x": Coherent(0.5j), "spin": Spinor(1, 1, 0.3)}, lay)
        assert s.trace() == pytest.approx(1.0)
        assert s.purity() == pytest.approx(1.0)
        rho = to_density(s)
        assert rho.purity() == pytest.approx(1.0)

    def test_expectations_factorize(self):
        lay = HilbertLayout.standard({"x": 12, "y": 10})
        s = product({"x": Coherent(0.5), "y": Coherent(0.25j), "spin": Spinor(1, 1, math.pi / 2)}, lay)
        px = embed(pbar(12), "x", lay)
        sy = embed(pauli("y"), "spin", lay)
        joint = expectation(px @ sy, s).real
        assert joint == pytest.approx(expectation(px, s).real * expectation(sy, s).real, abs=1e-12)

    def test_unknown_factor(self):
        with pytest.raises(HilbertError):
            product({"z": Fock(0)}, HilbertLayout.standard({"x": 3}))

    def test_spinor_on_mode_rejected(self):
        with pytest.raises(StateError):
            product({"x": Spinor()}, HilbertLayout.standard({"x": 3}))

    def test_packet_spec(self):
        lay = HilbertLayout.standard({"x": 60})
        s = product({"x": GaussianMomentum(2.0, 0.1)}, lay)
        assert isinstance(s, QuantumState)
        assert expectation(embed(pbar(60), "x", lay), s).real == pytest.approx(GOLDEN_P_MEAN, abs=1e-10)

    def test_fock_out_of_range(self):
        with pytest.raises(StateError):
            product({"x": Fock(3)}, HilbertLayout.standard({"x": 3}))
