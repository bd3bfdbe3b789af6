import json
import math

import numpy as np
import pytest

from wehrl.errors import DomainError, PreconditionError
from wehrl.fock_core import FockCutoff, fock_state, pure_state, random_state, thermal_state
from wehrl.functionals import CUBE, IDENTITY, SQUARE, XLOGX
from wehrl.theorem_lab import (
    VerificationReport,
    check_amplifier_thermal,
    check_attenuator_coherent,
    check_bound_f_convexity,
    check_duality,
    check_entropy_bound,
    check_entropy_saturation,
    check_epni,
    check_HA_limit,
    check_klein,
    check_lemma_q,
    check_majorization,
    check_measure_reprepare,
    check_pq_bound,
    hard_failures,
    lemma_q_threshold,
    pq_supremum,
    run_suite,
    table,
)

from .oracles import FOCK_WEHRL, LN2_PLUS_1, P1_SUP, PQ_15_2_VALUE, TWO_LN2, vacuum_square_series

KAPPAS = [2.0, 4.0, 8.0, 16.0, 32.0]


# --- report semantics --------------------------------------------------------


def test_pass_is_margin_against_budget():
    r = VerificationReport("x", {}, 1.0, 0.9, -0.1, 0.1)
    assert r.passed
    r = VerificationReport("x", {}, 1.0, 0.9, -0.1, 0.0999)
    assert not r.passed


def test_inequality_margin_and_infinite_rhs():
    r = VerificationReport.inequality("x", {}, 2.0, 3.5, 0.0)
    assert r.margin == 1.5
    r = VerificationReport.inequality("x", {}, 2.0, math.inf, 0.0)
    assert r.margin == math.inf and r.passed


def test_report_json_and_table():
    r = VerificationReport.inequality("demo", {"a": np.float64(1.0)}, 0.1234567891234, 1.0, 1e-9)
    d = json.loads(r.to_json())
    assert d["lhs"] == 0.123456789 and d["passed"] is True
    assert "demo" in table([r]) and "PASS" in table([r])


def test_hard_failures_ignore_evidence():
    bad = VerificationReport("a", {}, 1, 0, -1, 0)
    soft = VerificationReport("b", {}, 1, 0, -1, 0, hard=False)
    assert hard_failures([bad, soft]) == [bad]


# --- amplifier limit ---------------------------------------------------------


def test_ha_vacuum_square_closed_form():
    rep = check_HA_limit(fock_state(0, 2), SQUARE, KAPPAS)
    for k, v in rep.series:
        assert v == pytest.approx(vacuum_square_series(k), abs=1e-8)
    assert rep.series[0][1] == pytest.approx(2 / 3, abs=1e-12)
    assert rep.lhs == pytest.approx(0.5, abs=1e-10)
    assert rep.passed


def test_ha_thermal_identity_is_flat():
    rep = check_HA_limit(thermal_state(0.5), IDENTITY, [2.0, 8.0])
    assert all(v == pytest.approx(1.0, abs=1e-10) for _, v in rep.series)
    assert rep.passed


def test_ha_fock_one_square():
    rep = check_HA_limit(fock_state(1, 3), SQUARE, KAPPAS)
    assert rep.lhs == pytest.approx(0.25, abs=1e-10)
    vals = [v for _, v in rep.series]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    assert rep.passed


def test_ha_xlogx_note():
    rep = check_HA_limit(fock_state(0, 2), XLOGX, [2.0, 4.0])
    assert any("C^1" in n for n in rep.notes)


def test_ha_rejects_unsorted_gains():
    with pytest.raises(PreconditionError):
        check_HA_limit(fock_state(0, 2), SQUARE, [4.0, 2.0])


# --- majorization ------------------------------------------------------------


def test_majorization_passive_equality():
    rep = check_majorization(thermal_state(0.4, 20))
    assert abs(rep.margin) <= 1e-8
    assert rep.passed


def test_majorization_superposition_square():
    v = np.array([1, 1]) / math.sqrt(2)
    rho = pure_state(v, 2)
    rep = check_majorization(rho, [SQUARE])
    husimi = [d for d in rep.details if d["level"] == "husimi"][0]
    assert husimi["rhs"] == pytest.approx(0.5, abs=1e-10)
    assert husimi["lhs"] <= 0.5
    assert rep.passed


# --- p -> q ------------------------------------------------------------------


def test_pq_thermal_half_square():
    rep = check_pq_bound(thermal_state(0.5, FockCutoff.for_thermal(0.5, 1e-14)), 2, 2)
    assert rep.lhs == pytest.approx(0.8660254037844386, abs=1e-8)
    assert rep.rhs == 1.0 and rep.classification == "limit"
    assert rep.passed


@pytest.mark.parametrize("q", [2.0, 3.0])
def test_pq_p1_attained_at_vacuum(q):
    sup = pq_supremum(1.0, q)
    assert sup.argmax == pytest.approx(0.0, abs=1e-9)
    assert sup.value == pytest.approx(P1_SUP[q], abs=1e-9)
    assert sup.classification == "attained"


def test_pq_interior_supremum():
    sup = pq_supremum(1.5, 2.0)
    assert 0 < sup.argmax < 1
    assert sup.value == pytest.approx(PQ_15_2_VALUE, abs=1e-6)


def test_pq_infinite_when_p_exceeds_q():
    rep = check_pq_bound(thermal_state(0.5), 2, 1)
    assert rep.classification == "infinite"
    assert rep.passed


def test_pq_domain():
    with pytest.raises(DomainError):
        pq_supremum(0.5, 2)


def test_pq_two_mode_is_evidence_only():
    from wehrl.fock_core import tensor

    rho = tensor(random_state(3, 1), random_state(3, 2))
    rep = check_pq_bound(rho, 1.5, 3.0, tol=1e-6)
    assert not rep.hard
    assert rep.rhs == pytest.approx(pq_supremum(1.5, 3.0).value ** 2)


# --- entropy bounds ----------------------------------------------------------


def test_entropy_bound_thermal_saturates():
    rep = check_entropy_bound(thermal_state(0.5, FockCutoff.for_thermal(0.5, 1e-13)))
    assert rep.lhs == pytest.approx(LN2_PLUS_1, abs=1e-9)
    assert rep.saturated and rep.passed


def test_entropy_bound_fock_one():
    rep = check_entropy_bound(fock_state(1, 2))
    assert rep.lhs == pytest.approx(1.0, abs=1e-12)
    assert rep.rhs == pytest.approx(FOCK_WEHRL[1], abs=1e-6)
    assert rep.passed and not rep.saturated


@pytest.mark.parametrize("z", [0.0, 0.3, 0.6, 0.9])
def test_entropy_saturation(z):
    assert check_entropy_saturation(z).passed


def test_epni_vacuum_gain_two():
    rep = check_epni(fock_state(0, 2), 2.0)
    assert rep.lhs == pytest.approx(TWO_LN2, abs=1e-9)
    assert rep.rhs == pytest.approx(TWO_LN2, abs=1e-9)
    assert rep.passed


def test_epni_thermal_equality():
    rep = check_epni(thermal_state(0.4, FockCutoff.for_thermal(0.4, 1e-14)), 3.0)
    assert abs(rep.margin) <= 1e-6


def test_epni_random_states():
    for seed in range(5):
        assert check_epni(random_state(6, seed), 2.0).margin >= -1e-6


# --- appendix lemmas ---------------------------------------------------------


def test_klein_equal_operators_zero_margin():
    a = thermal_state(0.5).matrix
    assert check_klein(a, a, SQUARE).margin == 0.0


def test_klein_thermal_pair():
    rep = check_klein(thermal_state(0.5, 60), thermal_state(0.6, 60), SQUARE)
    assert rep.inputs["trace_distance"] > 0 and rep.passed


def test_klein_precondition():
    with pytest.raises(PreconditionError):
        check_klein(2 * np.eye(3), np.eye(3), SQUARE)
    with pytest.raises(PreconditionError):
        check_klein(np.eye(3), np.eye(3), XLOGX)


def test_lemma_q_example():
    assert lemma_q_threshold(1, 2) == pytest.approx(0.5)
    rep = check_lemma_q(1, 2, [0.5])
    assert rep.lhs == pytest.approx(0.25) and rep.rhs == pytest.approx(0.5)
    rep = check_lemma_q(1, 2, [0.0])
    assert rep.margin == 0.0 and rep.passed


def test_lemma_q_dense():
    x = lemma_q_threshold(1.5, 3)
    assert check_lemma_q(1.5, 3, np.linspace(0, x, 10001)).margin >= 0


def test_lemma_q_domain():
    with pytest.raises(DomainError):
        check_lemma_q(2, 2)


def test_bound_f_convexity():
    assert check_bound_f_convexity().passed


# --- channel identities ------------------------------------------------------


def test_channel_checks():
    assert check_amplifier_thermal(0.5, 2.0).passed
    assert check_attenuator_coherent(1 + 0.5j, 0.3).passed
    assert check_duality(2.0).passed
    assert check_measure_reprepare(2.0, 12, 0).passed


# --- suites ------------------------------------------------------------------


def test_suite_is_deterministic():
    a = [r.to_json() for r in run_suite("entropy", trials=4, seed=1, thermal_z=[0.5])]
    b = [r.to_json() for r in run_suite("entropy", trials=4, seed=1, thermal_z=[0.5])]
    assert a == b


def test_suite_parallel_matches_serial():
    a = [r.to_json() for r in run_suite("klein", trials=6, seed=2)]
    b = [r.to_json() for r in run_suite("klein", trials=6, seed=2, jobs=2)]
    assert a == b


def test_majorization_family_cube():
    rep = check_majorization(random_state(5, 9), [CUBE], kappas=(2.0,))
    assert rep.margin >= -1e-8
