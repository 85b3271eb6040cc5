"""Acceptance criteria, one test per criterion at its stated tolerance.

Each test prints a single pass/fail line; the lines are repeated in the
terminal summary under "acceptance criteria".
"""

import pytest

from iontraj import validation as v
from iontraj.presets import preset
from iontraj.runner import simulate


@pytest.fixture(scope="module")
def zb_record():
    return simulate(preset("zb-rashba"))


def test_criterion_1_fig2a_lissajous(acceptance_report):
    checks = v.check_fig2a()
    assert acceptance_report(1, "fig2a closes with a 7:5 ratio near 50/35 kHz", checks)


def test_criterion_2_rk4_matches_exact(acceptance_report):
    checks = v.check_oracle_fig2b()
    assert acceptance_report(2, "fig2b rk4 vs exact propagator < 1e-8 in < 30 s", checks)


def test_criterion_3_lindblad_oracle(acceptance_report):
    checks = v.check_lindblad_oracle()
    assert acceptance_report(3, "master equation vs Liouvillian expm < 1e-6 at tau=5", checks)


def test_criterion_4_damping_and_rabi(acceptance_report):
    checks = [v.check_damping_law(), v.check_jc_rabi()]
    assert acceptance_report(4, "damped <a> and bounded JC Rabi transfer to 1e-6", checks)


def test_criterion_5_conservation(acceptance_report, zb_record):
    checks = []
    for name in v.CONSERVATION_PRESETS:
        checks += v.conservation_checks(name, zb_record if name == "zb-rashba" else None)
    checks += v.check_hermiticity()
    assert acceptance_report(5, "norm, energy, momentum, trace and positivity", checks)


def test_criterion_6_bounded_leakage(acceptance_report):
    checks = [v.check_leakage(N=2, t_max=50.0)]
    assert acceptance_report(6, "N=2 leakage < 1e-10 for tau <= 50", checks)


def test_criterion_7_locking(acceptance_report):
    checks = v.check_locking()
    assert acceptance_report(7, "zb-locked drift < 2% of amplitude, kappa_x == 0", checks)


def test_criterion_8_zitterbewegung(acceptance_report, zb_record):
    checks = v.check_zb_frequency(zb_record) + [v.check_zb_correlation(zb_record)]
    assert acceptance_report(8, "zb-rashba <ybar> frequency within 5% of a candidate", checks)


def test_criterion_9_determinism(acceptance_report):
    checks = [v.check_determinism("fig2f")]
    assert acceptance_report(9, "fig2f deterministic CSV byte-identical", checks)


def test_perturbed_dt_is_flagged():
    # the convergence check must fail loudly, not pass vacuously, at a bad step
    checks = v.check_convergence(0.5)
    accuracy = next(c for c in checks if c.name == "rk4 accuracy on fig2b")
    assert not accuracy.passed
