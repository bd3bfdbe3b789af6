import math

import numpy as np
import pytest

from wehrl.errors import DomainError
from wehrl.fock_core import DensityOperator, FockCutoff, Spectrum, random_isospectral_state, thermal_state
from wehrl.functionals import SQUARE, XLOGX
from wehrl.optimizer import (
    GridFunctional,
    _orbit_search,
    givens,
    golden_section_sup,
    maximize_norm_ratio,
    minimize_wehrl_isospectral,
    restarts,
    thermal_ratio,
)
from wehrl.phase_space import convex_functional
from wehrl.theorem_lab import pq_profile, pq_supremum

from .oracles import P1_SUP, PQ_15_2_ARGMAX, PQ_15_2_VALUE


def _passive(spec, dim):
    p = np.zeros(dim)
    p[: len(spec)] = spec
    return DensityOperator(FockCutoff(dim), np.diag(p).astype(complex), max(0.0, 1 - p.sum()))


# --- golden section ----------------------------------------------------------


def test_golden_monotone_decreasing_endpoint():
    x, v = golden_section_sup(lambda z: math.sqrt(1 - z) / math.sqrt(2), 0.0, 0.999)
    assert x == 0.0 and v == pytest.approx(P1_SUP[2.0])


def test_golden_constant():
    x, v = golden_section_sup(lambda z: 3.0, 0.0, 1.0)
    assert 0.0 <= x <= 1.0 and v == 3.0


def test_golden_interior():
    x, v = golden_section_sup(lambda z: float(pq_profile(z, 1.5, 2.0)), 0.0, 0.99, 1e-10)
    assert x == pytest.approx(PQ_15_2_ARGMAX, abs=1e-5)
    assert v == pytest.approx(PQ_15_2_VALUE, abs=1e-9)


def test_golden_nonfinite():
    with pytest.raises(DomainError):
        golden_section_sup(lambda z: math.inf, 0.0, 1.0)


# --- building blocks ---------------------------------------------------------


def test_givens_preserves_spectrum():
    rho = random_isospectral_state([0.5, 0.3, 0.2], FockCutoff(5), 0)
    m = givens(rho.matrix, 1, 3, 0.7, 1.1)
    assert np.allclose(np.linalg.eigvalsh(m), np.linalg.eigvalsh(rho.matrix), atol=1e-12)


def test_grid_functional_matches_adaptive():
    # the search grid is fixed and coarse; final values are recomputed adaptively
    rho = random_isospectral_state([0.5, 0.25, 0.125, 0.125], FockCutoff(10), 3)
    for f in (XLOGX, SQUARE):
        g = GridFunctional(10, f)
        assert g(rho.matrix) == pytest.approx(convex_functional(rho, f).value, abs=1e-6)


def test_orbit_search_history_monotone_and_isospectral():
    rho = random_isospectral_state([0.6, 0.3, 0.1], FockCutoff(6), 4)
    m, hist, evals, _ = _orbit_search(rho.matrix, GridFunctional(6, XLOGX), np.random.default_rng(0), 400, sign=-1.0)
    assert all(b >= a for a, b in zip(hist, hist[1:]))
    assert np.allclose(np.linalg.eigvalsh(m), np.linalg.eigvalsh(rho.matrix), atol=1e-10)
    assert evals <= 400 + 8


# --- Wehrl minimization ------------------------------------------------------


def test_passive_start_needs_no_moves():
    spec = 0.5 ** np.arange(1, 17)
    tr = minimize_wehrl_isospectral(spec, FockCutoff(16), seed=0, initial=_passive(spec, 16))
    assert tr.iterations == 0
    assert 0 <= tr.gap <= 1e-4


def test_pure_spectrum_reaches_coherent_value():
    tr = minimize_wehrl_isospectral([1.0], FockCutoff(6), seed=1, budget=20_000)
    assert tr.best_value == pytest.approx(1.0, abs=1e-3)
    assert tr.gap >= -1e-6
    h = tr.objective_history
    assert all(b <= a for a, b in zip(h, h[1:]))


def test_thermal_spectrum_from_random_start():
    spec = 0.5 ** np.arange(1, 17)
    tr = minimize_wehrl_isospectral(spec, FockCutoff(16), seed=3)
    assert tr.best_value - (math.log(2) + 1) <= 1e-3
    assert tr.gap >= -1e-6
    assert tr.evaluations <= 50_000
    ev = np.sort(np.linalg.eigvalsh(tr.best_state.matrix))[::-1]
    assert np.allclose(ev, spec, atol=1e-10)
    assert tr.proximity is not None


def test_small_budget_flags_partial():
    tr = minimize_wehrl_isospectral([0.7, 0.3], FockCutoff(6), seed=2, budget=20)
    assert tr.partial and tr.notes


def test_spectrum_must_fit():
    with pytest.raises(DomainError):
        minimize_wehrl_isospectral(Spectrum.from_values([0.25] * 4), FockCutoff(3), seed=0)


def test_restarts_follow_seed_order():
    out = restarts([0.8, 0.2], 4, [5, 6], budget=300)
    assert [t.seed for t in out] == [5, 6]


# --- norm ratio --------------------------------------------------------------


def test_norm_ratio_p1_vacuum():
    tr = maximize_norm_ratio(1, 2, FockCutoff(12), seed=0, budget=300)
    assert tr.argmax_z == pytest.approx(0.0, abs=1e-3)
    assert tr.best_value == pytest.approx(P1_SUP[2.0], abs=1e-6)
    assert tr.best_value <= pq_supremum(1, 2).value + 1e-6


def test_norm_ratio_p_equals_q_below_one():
    tr = maximize_norm_ratio(2, 2, FockCutoff(12), seed=0, budget=300)
    assert tr.best_value <= 1 + 1e-6
    path = [float(pq_profile(z, 2, 2)) for z in (0.9, 0.99, 0.999)]
    assert path == sorted(path) and max(path) < 1


def test_norm_ratio_divergence():
    tr = maximize_norm_ratio(2, 1, FockCutoff(8))
    vals = [v for _, v in tr.divergence]
    assert [z for z, _ in tr.divergence] == [0.9, 0.99, 0.999]
    assert vals == sorted(vals) and tr.best_value == math.inf


@pytest.mark.parametrize("seed", range(50))
def test_perturbed_thermal_never_beats_thermal(seed):
    z = 0.3
    base = thermal_ratio(z, 1.5, 3.0, FockCutoff(10))
    rho = random_isospectral_state(np.diag(thermal_state(z, 10).matrix).real / thermal_state(z, 10).trace, FockCutoff(10), seed)
    from wehrl.fock_core import schatten_norm
    from wehrl.phase_space import husimi_q_norm

    assert husimi_q_norm(rho, 3.0).value / schatten_norm(rho, 1.5) <= base + 1e-9
