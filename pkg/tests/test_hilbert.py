import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from iontraj.hilbert import (
    Factor,
    HilbertError,
    HilbertLayout,
    OperatorMatrix,
    QuantumState,
    apply_factor,
    bounded_A,
    bounded_eta,
    commutator,
    embed,
    embed_many,
    expectation,
    factor_expectation,
    identity,
    ladder,
    number,
    pauli,
    pbar,
    upper_bound_A,
    xbar,
)
from iontraj.states import coherent, spinor

dims = st.integers(min_value=2, max_value=12)


def basis(n, dim):
    v = np.zeros(dim, dtype=complex)
    v[n] = 1
    return v


class TestLayout:
    def test_standard_order_and_total_dim(self):
        lay = HilbertLayout.standard({"y": 4, "x": 3})
        assert lay.labels == ("x", "y", "spin")
        assert lay.total_dim == 24

    def test_four_level_layout(self):
        lay = HilbertLayout.standard({"x": 3, "y": 3}, spins=("spin", "spin2"))
        assert lay.labels == ("x", "y", "spin", "spin2")
        assert lay.total_dim == 36

    @pytest.mark.parametrize(
        "factor",
        [("mode", 1, "x"), ("spin", 3, "spin"), ("qutrit", 3, "q")],
    )
    def test_bad_factors(self, factor):
        with pytest.raises(HilbertError):
            Factor(*factor)

    def test_duplicate_labels(self):
        with pytest.raises(HilbertError):
            HilbertLayout((Factor("mode", 3, "x"), Factor("mode", 3, "x")))

    def test_unknown_label(self):
        with pytest.raises(HilbertError, match="no factor"):
            HilbertLayout.standard({"x": 3}).index("y")

    def test_unknown_mode_in_standard(self):
        with pytest.raises(HilbertError):
            HilbertLayout.standard({"z": 3})

    def test_operator_shape_checked(self):
        with pytest.raises(HilbertError):
            OperatorMatrix(HilbertLayout.standard({"x": 3}), np.eye(5))


class TestLadder:
    def test_lowering_top_level(self):
        a, _ = ladder(4)
        np.testing.assert_allclose(a.data @ basis(3, 4), math.sqrt(3) * basis(2, 4))

    def test_vacuum_annihilated(self):
        a, _ = ladder(4)
        assert np.all(a.data @ basis(0, 4) == 0)

    def test_commutator_dim3(self):
        a, ad = ladder(3)
        np.testing.assert_allclose(commutator(a, ad).data, np.diag([1, 1, -2]))

    @given(dims)
    def test_truncated_commutator_closed_form(self, d):
        a, ad = ladder(d)
        expected = np.diag([1.0] * (d - 1) + [-(d - 1.0)])
        np.testing.assert_allclose(commutator(a, ad).data, expected, atol=1e-12)

    @given(dims)
    def test_number_is_ad_a(self, d):
        a, ad = ladder(d)
        np.testing.assert_allclose((ad @ a).data, number(d).data, atol=1e-14)

    def test_invalid_dim(self):
        with pytest.raises(HilbertError):
            ladder(1)
        with pytest.raises(HilbertError):
            ladder(2.5)


class TestQuadratures:
    def test_vacuum_pbar_squared(self):
        P = pbar(6).data
        assert np.vdot(basis(0, 6), P @ P @ basis(0, 6)).real == pytest.approx(1.0)

    def test_coherent_xbar(self):
        psi = coherent(1.0, 15)
        assert np.vdot(psi, xbar(15).data @ psi).real == pytest.approx(2.0, abs=1e-8)

    @given(dims)
    def test_hermitian_exactly(self, d):
        assert xbar(d).hermiticity_error() == 0.0
        assert pbar(d).hermiticity_error() == 0.0

    @given(dims)
    def test_canonical_commutator_except_top(self, d):
        c = commutator(xbar(d), pbar(d)).data
        expected = 2j * np.diag([1.0] * (d - 1) + [-(d - 1.0)])
        np.testing.assert_allclose(c, expected, atol=1e-12)


class TestBoundedA:
    def test_entry_below_bound(self):
        A = bounded_A(1.0, 5).data
        assert A[1, 2] == pytest.approx(math.sqrt(2) / 2)

    def test_blocking_entry(self):
        assert bounded_A(1.0, 5).data[2, 3] == 0.0

    @given(st.integers(min_value=1, max_value=8), st.integers(min_value=0, max_value=6))
    def test_block_invariance_exact(self, N, extra):
        dim = N + 2 + extra
        A = upper_bound_A(N, dim).data
        assert np.all(A[: N + 1, N + 1:] == 0)
        assert np.all(A.conj().T[N + 1:, : N + 1] == 0)
        # A^dag |N> = 0
        assert np.all(A.conj().T @ basis(N, dim) == 0)

    @given(st.integers(min_value=1, max_value=8))
    def test_upper_bound_matches_eta_form(self, N):
        np.testing.assert_allclose(
            upper_bound_A(N, N + 4).data, bounded_A(bounded_eta(N), N + 4).data, atol=1e-14
        )

    def test_invalid(self):
        with pytest.raises(HilbertError):
            bounded_A(0.0, 4)
        with pytest.raises(HilbertError):
            bounded_eta(0)


class TestPauli:
    def test_raising_on_ground(self):
        g, e = np.array([0, 1]), np.array([1, 0])
        np.testing.assert_array_equal(pauli("+").data @ g, e)

    def test_square_identity(self):
        for ax in "xyz":
            np.testing.assert_array_equal((pauli(ax) @ pauli(ax)).data, np.eye(2))

    def test_raising_minus_lowering(self):
        np.testing.assert_array_equal((pauli("+") - pauli("-")).data, 1j * pauli("y").data)

    def test_unknown_axis(self):
        with pytest.raises(HilbertError):
            pauli("w")


class TestEmbed:
    def test_spin_on_mode_spin(self):
        lay = HilbertLayout.standard({"x": 2})
        np.testing.assert_array_equal(embed(pauli("z"), "spin", lay).data, np.kron(np.eye(2), np.diag([1, -1])))

    def test_disjoint_factors_commute(self):
        lay = HilbertLayout.standard({"x": 3, "y": 4})
        ax = embed(ladder(3)[0], "x", lay)
        ay = embed(ladder(4)[0], "y", lay)
        assert np.max(np.abs(commutator(ax, ay).data)) == 0

    def test_identity(self):
        lay = HilbertLayout.standard({"x": 3, "y": 2})
        np.testing.assert_array_equal(embed(np.eye(2), "y", lay).data, identity(lay).data)

    @given(st.integers(2, 5), st.integers(0, 10_000))
    @settings(max_examples=25)
    def test_homomorphism(self, d, seed):
        rng = np.random.default_rng(seed)
        lay = HilbertLayout.standard({"x": d, "y": 3})
        M = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        N = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        lhs = embed(M @ N, "x", lay).data
        rhs = (embed(M, "x", lay) @ embed(N, "x", lay)).data
        np.testing.assert_allclose(lhs, rhs, atol=1e-12)

    def test_wrong_shape(self):
        with pytest.raises(HilbertError):
            embed(np.eye(3), "spin", HilbertLayout.standard({"x": 3}))

    def test_embed_many_is_product(self):
        lay = HilbertLayout.standard({"x": 3, "y": 3})
        a = ladder(3)[0]
        both = embed_many({"x": a, "spin": pauli("x")}, lay)
        np.testing.assert_allclose(both.data, (embed(a, "x", lay) @ embed(pauli("x"), "spin", lay)).data)

    def test_layout_mismatch(self):
        with pytest.raises(HilbertError):
            identity(HilbertLayout.standard({"x": 2})) @ identity(HilbertLayout.standard({"x": 3}))


class TestExpectation:
    def test_identity_on_state(self):
        lay = HilbertLayout.standard({"x": 3})
        v = np.kron(coherent(0.2, 3, cutoff=2), spinor(0.6, 0.8))
        assert expectation(identity(lay), QuantumState(lay, v)) == pytest.approx(1.0)

    def test_sigma_z_up(self):
        lay = HilbertLayout((Factor("spin", 2, "spin"),))
        assert expectation(pauli("z"), QuantumState(lay, [1, 0])) == 1.0

    def test_number_on_coherent(self):
        psi = coherent(1.0, 15)
        lay = HilbertLayout((Factor("mode", 15, "mode"),))
        assert expectation(number(15), QuantumState(lay, psi)).real == pytest.approx(1.0, abs=1e-8)

    @given(st.integers(0, 10_000))
    @settings(max_examples=30)
    def test_hermitian_expectation_real(self, seed):
        rng = np.random.default_rng(seed)
        lay = HilbertLayout.standard({"x": 3})
        v = rng.normal(size=6) + 1j * rng.normal(size=6)
        state = QuantumState(lay, v / np.linalg.norm(v))
        M = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
        H = OperatorMatrix(lay, M + M.conj().T)
        assert abs(expectation(H, state).imag) < 1e-10
        rho = QuantumState(lay, state.density())
        assert abs(expectation(H, rho).imag) < 1e-10

    def test_factor_expectation_matches_embed(self):
        lay = HilbertLayout.standard({"x": 4, "y": 3})
        rng = np.random.default_rng(3)
        v = rng.normal(size=lay.total_dim) + 1j * rng.normal(size=lay.total_dim)
        s = QuantumState(lay, v / np.linalg.norm(v))
        for label, op in (("x", pbar(4)), ("y", xbar(3)), ("spin", pauli("y"))):
            assert factor_expectation(op, label, s) == pytest.approx(expectation(embed(op, label, lay), s))
            np.testing.assert_allclose(apply_factor(op, label, s), embed(op, label, lay).data @ s.data)

    def test_state_checks(self):
        lay = HilbertLayout.standard({"x": 2})
        with pytest.raises(HilbertError, match="normalized"):
            QuantumState(lay, np.ones(4)).check()
        bad = np.diag([1.2, -0.2, 0, 0]).astype(complex)
        with pytest.raises(HilbertError, match="negative"):
            QuantumState(lay, bad).check()
