import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from iontraj.dynamics import (
    CSV_COLUMNS,
    DynamicsError,
    EvolutionConfig,
    IntegrationInstabilityError,
    ObservableContext,
    TrajectoryRecord,
    TruncationError,
    damping_operators,
    evolve,
    evolve_lindblad,
    evolve_unitary,
    lindblad_rhs,
    liouvillian,
    reachable_support,
    record_observables,
)
from iontraj.hilbert import HilbertError, HilbertLayout, OperatorMatrix, QuantumState, embed, pauli, pbar, xbar, zeros
from iontraj.models import (
    BoundedRashbaDresselhaus,
    Dirac1D,
    FourLevelRashba,
    Rashba2D,
    RashbaDresselhaus,
    build,
    momentum_form,
)
from iontraj.states import Coherent, Fock, GaussianMomentum, Spinor, product, to_density

SMALL = HilbertLayout.standard({"x": 4, "y": 3})


def random_state(layout, seed):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=layout.total_dim) + 1j * rng.normal(size=layout.total_dim)
    return QuantumState(layout, v / np.linalg.norm(v))


def expm_oracle(H, psi, taus, names=("x", "px", "y", "py", "sx", "sy", "sz")):
    lay = H.layout
    ops = {
        "x": embed(xbar(lay.dim("x")), "x", lay).data,
        "px": embed(pbar(lay.dim("x")), "x", lay).data,
        "sx": embed(pauli("x"), "spin", lay).data,
        "sy": embed(pauli("y"), "spin", lay).data,
        "sz": embed(pauli("z"), "spin", lay).data,
    }
    if "y" in lay:
        ops["y"] = embed(xbar(lay.dim("y")), "y", lay).data
        ops["py"] = embed(pbar(lay.dim("y")), "y", lay).data
    out = {n: [] for n in names if n in ops}
    for t in taus:
        v = expm(-1j * H.data * t) @ psi.data
        for n in out:
            out[n].append(np.vdot(v, ops[n] @ v).real)
    return {n: np.array(v) for n, v in out.items()}


class TestConfig:
    @pytest.mark.parametrize(
        "kwargs",
        [dict(t_max=-1.0), dict(t_max=1.0, dt=0.0), dict(t_max=1.0, sample_every=0),
         dict(t_max=1.0, method="euler"), dict(t_max=1.0, dissipation=(("x", -0.1),)),
         dict(t_max=1.0, tail_tolerance=0.0)],
    )
    def test_rejects(self, kwargs):
        with pytest.raises(ValueError):
            EvolutionConfig(**kwargs)

    def test_sample_grid(self):
        ev = EvolutionConfig(t_max=1.0, dt=0.1, sample_every=3)
        np.testing.assert_array_equal(ev.sample_steps(), [0, 3, 6, 9])
        np.testing.assert_allclose(ev.sample_times(), [0, 0.3, 0.6, 0.9])

    def test_dissipative_flag(self):
        assert not EvolutionConfig(t_max=1, dissipation=(("x", 0.0),)).dissipative
        assert EvolutionConfig(t_max=1, dissipation=(("x", 0.1),)).dissipative


class TestUnitary:
    @pytest.mark.parametrize("method", ["rk4", "exact"])
    def test_against_expm(self, method):
        H = build(RashbaDresselhaus(0.8, 0.5, 0.3, 0.6), SMALL)
        psi = random_state(SMALL, 1)
        ev = EvolutionConfig(t_max=2.0, dt=0.01, sample_every=20, method=method, tail_tolerance=math.inf)
        rec = evolve_unitary(H, psi, ev)
        ref = expm_oracle(H, psi, rec.tau)
        for name, vals in ref.items():
            np.testing.assert_allclose(getattr(rec, name), vals, atol=1e-9, err_msg=name)

    @pytest.mark.parametrize(
        "spec,dims,spins",
        [
            (Rashba2D(1.0, 0.6), {"x": 12, "y": 10}, ("spin",)),
            (RashbaDresselhaus(0.7, 1.1, 0.4, -0.3), {"x": 12, "y": 10}, ("spin",)),
            (Dirac1D(1.2, 0.5), {"x": 30}, ("spin",)),
            (FourLevelRashba(0.9), {"x": 8, "y": 8}, ("spin", "spin2")),
        ],
    )
    def test_momentum_matches_dense_exact(self, spec, dims, spins):
        lay = HilbertLayout.standard(dims, spins=spins)
        specs = {m: Coherent(0.4 + 0.2j * i) for i, m in enumerate(dims)}
        specs["spin"] = Spinor(1, 1, 0.7)
        psi = product(specs, lay)
        ev = EvolutionConfig(t_max=3.0, dt=0.01, sample_every=25, tail_tolerance=math.inf)
        a = evolve_unitary(momentum_form(spec, lay), psi, EvolutionConfig(**{**ev.__dict__, "method": "momentum"}))
        b = evolve_unitary(build(spec, lay), psi, EvolutionConfig(**{**ev.__dict__, "method": "exact"}))
        for name in ("x", "px", "sx", "sy", "sz", "energy", "trace"):
            np.testing.assert_allclose(getattr(a, name), getattr(b, name), atol=1e-10, err_msg=name)
        np.testing.assert_allclose(a.final.data, b.final.data, atol=1e-10)

    def test_momentum_needs_form(self):
        H = build(Rashba2D(), SMALL)
        with pytest.raises(DynamicsError):
            evolve_unitary(H, random_state(SMALL, 0), EvolutionConfig(t_max=1, method="momentum"))

    def test_conserves_norm_and_energy(self):
        H = build(RashbaDresselhaus(), SMALL)
        rec = evolve_unitary(H, random_state(SMALL, 5), EvolutionConfig(t_max=3, tail_tolerance=math.inf))
        assert np.max(np.abs(rec.trace - 1)) < 1e-9
        assert np.max(np.abs(rec.energy - rec.energy[0])) < 1e-9

    def test_rejects_non_hermitian(self):
        bad = OperatorMatrix(SMALL, np.triu(np.ones((24, 24))))
        with pytest.raises(HilbertError, match="Hermitian"):
            evolve_unitary(bad, random_state(SMALL, 0), EvolutionConfig(t_max=0.1))

    def test_truncation_guard_names_mode(self):
        lay = HilbertLayout.standard({"x": 10})
        H = build(Dirac1D(4.0, 0.0), lay)
        psi = product({"x": Fock(7)}, lay)
        with pytest.raises(TruncationError) as exc:
            evolve_unitary(H, psi, EvolutionConfig(t_max=1.0, dt=0.01))
        assert exc.value.mode == "x"

    def test_bounded_leakage_tracked(self):
        spec = BoundedRashbaDresselhaus(N_x=1, N_y=1)
        lay = HilbertLayout.standard({"x": 4, "y": 4})
        psi = product({"x": Coherent(1.0, cutoff=1), "y": Coherent(1.0, cutoff=1)}, lay)
        rec = evolve_unitary(build(spec, lay), psi, EvolutionConfig(t_max=5, reduce=False, method="exact"),
                             bounds=spec.bounds)
        assert np.max(rec.leakage) < 1e-20

    def test_extra_observable(self):
        H = build(Rashba2D(), SMALL)
        psi = random_state(SMALL, 2)
        sz = embed(pauli("z"), "spin", SMALL)
        rec = evolve_unitary(H, psi, EvolutionConfig(t_max=1, tail_tolerance=math.inf), extra={"zz": sz})
        np.testing.assert_allclose(rec.extra["zz"], rec.sz, atol=1e-14)

    def test_layout_mismatch(self):
        H = build(Rashba2D(), HilbertLayout.standard({"x": 3, "y": 3}))
        with pytest.raises(HilbertError):
            evolve_unitary(H, random_state(SMALL, 0), EvolutionConfig(t_max=1))


class TestSupport:
    def test_chain(self):
        m = np.diag(np.ones(4), 1)
        np.testing.assert_array_equal(reachable_support(np.array([2]), [m]), [0, 1, 2])
        np.testing.assert_array_equal(reachable_support(np.array([2]), [m + m.T]), [0, 1, 2, 3, 4])

    def test_reduced_equals_full(self):
        spec = BoundedRashbaDresselhaus(N_x=2, N_y=1, beta_x=0.6, beta_y=1.2)
        lay = HilbertLayout.standard({"x": 6, "y": 5})
        H = build(spec, lay)
        psi = product({"x": Coherent(0.5, cutoff=2), "y": Coherent(0.5j, cutoff=1)}, lay)
        base = dict(t_max=4.0, dt=0.01, sample_every=20, method="exact")
        a = evolve_unitary(H, psi, EvolutionConfig(**base, reduce=True), bounds=spec.bounds)
        b = evolve_unitary(H, psi, EvolutionConfig(**base, reduce=False), bounds=spec.bounds)
        for name in ("x", "y", "px", "py", "sx", "sy", "sz", "energy"):
            np.testing.assert_allclose(getattr(a, name), getattr(b, name), atol=1e-12)


class TestObservables:
    def test_record_matches_direct(self):
        psi = random_state(SMALL, 9)
        H = build(Rashba2D(), SMALL)
        row = record_observables(psi, ObservableContext(SMALL, hamiltonian=H.data))
        assert row["x"] == pytest.approx(np.vdot(psi.data, embed(xbar(4), "x", SMALL).data @ psi.data).real)
        assert row["energy"] == pytest.approx(np.vdot(psi.data, H.data @ psi.data).real)
        assert row["trace"] == pytest.approx(1.0)
        assert math.isnan(row["leakage"])

    def test_density_row(self):
        rho = to_density(random_state(SMALL, 4))
        row = record_observables(rho, ObservableContext(SMALL))
        assert row["purity"] == pytest.approx(1.0)
        assert row["min_eig"] == pytest.approx(0.0, abs=1e-12)

    def test_record_table(self):
        rec = TrajectoryRecord.from_rows([{c: float(i) for c in CSV_COLUMNS} for i in range(3)])
        assert len(rec) == 3
        assert rec.table().shape == (3, len(CSV_COLUMNS))
        with pytest.raises(KeyError):
            rec.column("nope")


class TestLindblad:
    @given(st.integers(0, 1000), st.floats(0.0, 0.5))
    @settings(max_examples=20, deadline=None)
    def test_rhs_matches_superoperator(self, seed, rate):
        rng = np.random.default_rng(seed)
        n = 5
        h = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        h = h + h.conj().T
        L = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        rho = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        rho = rho @ rho.conj().T
        rho /= np.trace(rho)
        lhs = lindblad_rhs(rho, h, [(L, rate)])
        rhs = (liouvillian(h, [(L, rate)]) @ rho.reshape(-1)).reshape(n, n)
        np.testing.assert_allclose(lhs, rhs, atol=1e-10)
        # trace preserving, Hermiticity preserving
        assert abs(np.trace(lhs)) < 1e-10
        np.testing.assert_allclose(lhs, lhs.conj().T, atol=1e-10)

    def test_zero_rate_reduces_to_unitary(self):
        H = build(RashbaDresselhaus(0.8, 0.5, 0.3, 0.6), SMALL)
        psi = random_state(SMALL, 3)
        ev = EvolutionConfig(t_max=1.0, dt=0.01, sample_every=10, tail_tolerance=math.inf)
        a = evolve_unitary(H, psi, ev)
        b = evolve_lindblad(H, damping_operators(SMALL, (("x", 0.0),)), to_density(psi), ev)
        for name in ("x", "y", "sx", "sz"):
            np.testing.assert_allclose(getattr(a, name), getattr(b, name), atol=1e-10)

    @pytest.mark.parametrize("method", ["rk4", "exact"])
    def test_damped_mode_decays(self, method):
        lay = HilbertLayout.standard({"x": 14}, spins=())
        rho0 = to_density(product({"x": Coherent(1.0)}, lay))
        ev = EvolutionConfig(t_max=4.0, dt=0.01, sample_every=50, method=method,
                             dissipation=(("x", 0.2),), tail_tolerance=math.inf, reduce=False)
        rec = evolve_lindblad(zeros(lay), damping_operators(lay, ev.dissipation), rho0, ev)
        np.testing.assert_allclose(rec.x, 2 * np.exp(-0.1 * rec.tau), atol=1e-7)
        assert np.max(np.abs(rec.trace - 1)) < 1e-12

    def test_exact_support_limit(self):
        lay = HilbertLayout.standard({"x": 70}, spins=())
        rho0 = to_density(product({"x": Coherent(1.0)}, lay))
        ev = EvolutionConfig(t_max=1.0, method="exact", dissipation=(("x", 0.2),), reduce=False)
        with pytest.raises(DynamicsError, match="support"):
            evolve_lindblad(zeros(lay), damping_operators(lay, ev.dissipation), rho0, ev)

    def test_exact_against_expm_small(self):
        lay = HilbertLayout.standard({"x": 4}, spins=())
        H = embed(np.diag([0.0, 1.0, 2.0, 3.0]), "x", lay)
        rho0 = to_density(product({"x": Coherent(0.6, cutoff=3)}, lay))
        collapse = damping_operators(lay, (("x", 0.3),))
        ev = EvolutionConfig(t_max=2.0, dt=0.01, sample_every=100, method="exact", tail_tolerance=math.inf)
        rec = evolve_lindblad(H, collapse, rho0, ev)
        L = liouvillian(H.data, [(collapse[0][0].data, 0.3)])
        ref = (expm(2.0 * L) @ rho0.data.reshape(-1)).reshape(4, 4)
        np.testing.assert_allclose(rec.final.data, ref, atol=1e-12)

    def test_instability_detected(self):
        lay = HilbertLayout.standard({"x": 8}, spins=())
        rho0 = to_density(product({"x": Fock(4)}, lay))
        ev = EvolutionConfig(t_max=20.0, dt=1.5, sample_every=1, dissipation=(("x", 1.0),),
                             tail_tolerance=math.inf)
        with pytest.raises((IntegrationInstabilityError, DynamicsError)):
            evolve_lindblad(zeros(lay), damping_operators(lay, ev.dissipation), rho0, ev)

    def test_damping_on_spin_rejected(self):
        with pytest.raises(HilbertError):
            damping_operators(SMALL, (("spin", 0.1),))

    def test_evolve_dispatch(self):
        H = build(Rashba2D(), SMALL)
        psi = random_state(SMALL, 1)
        ev = EvolutionConfig(t_max=0.5, dissipation=(("x", 0.1),), tail_tolerance=math.inf)
        rec = evolve(H, psi, ev)
        assert rec.final.data.ndim == 2
        rec = evolve(H, psi, EvolutionConfig(t_max=0.5, tail_tolerance=math.inf))
        assert rec.final.data.ndim == 1

    def test_momentum_rejected_for_open(self):
        H = build(Rashba2D(), SMALL)
        ev = EvolutionConfig(t_max=0.5, method="momentum", dissipation=(("x", 0.1),))
        with pytest.raises(DynamicsError):
            evolve(H, random_state(SMALL, 1), ev)


def test_gaussian_packet_momentum_constant():
    lay = HilbertLayout.standard({"x": 80})
    psi = product({"x": GaussianMomentum(1.0, 0.1)}, lay)
    form = momentum_form(Dirac1D(1.0, 0.5), lay)
    rec = evolve_unitary(form, psi, EvolutionConfig(t_max=2, dt=0.01, sample_every=20, method="momentum"))
    assert np.max(np.abs(rec.px - rec.px[0])) < 1e-10
