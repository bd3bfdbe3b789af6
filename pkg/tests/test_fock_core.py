import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from wehrl.errors import DomainError, NotAStateError, TruncationError
from wehrl.fock_core import (
    DensityOperator,
    FockCutoff,
    Spectrum,
    bound_f,
    coherent_tail,
    coherent_vector,
    displacement_matrix,
    fidelity,
    fock_state,
    g,
    g_inv,
    haar_unitary,
    mean_energy,
    partial_trace_last,
    passive_rearrangement,
    random_isospectral_state,
    random_state,
    schatten_norm,
    tensor,
    thermal_state,
    trace_distance,
    von_neumann_entropy,
)

from .oracles import LN2_PLUS_1, THERMAL_HALF_SCHATTEN_2, TWO_LN2


def test_cutoff_rejects_tiny_dimension():
    with pytest.raises(DomainError):
        FockCutoff(1)


def test_cutoff_for_thermal_meets_tail():
    cut = FockCutoff.for_thermal(0.9, 1e-12)
    assert 0.9**cut.dim < 1e-12 <= 0.9 ** (cut.dim - 1)


def test_multimode_occupations_row_major():
    occ = FockCutoff(3, 2).occupations()
    assert occ.shape == (9, 2)
    assert occ[5].tolist() == [1, 2]


def test_thermal_state_entropy_and_energy():
    rho = thermal_state(0.5)
    assert von_neumann_entropy(rho) == pytest.approx(TWO_LN2, abs=1e-10)
    assert mean_energy(rho) == pytest.approx(1.0, abs=1e-9)
    assert rho.tail_bound == pytest.approx(0.5**rho.dim)


def test_thermal_schatten_closed_form():
    assert schatten_norm(thermal_state(0.5), 2) == pytest.approx(THERMAL_HALF_SCHATTEN_2, abs=1e-12)


@pytest.mark.parametrize("z", [0.1, 0.5, 0.8])
@pytest.mark.parametrize("p", [1.5, 3.0])
def test_thermal_schatten_family(z, p):
    expected = (1 - z) / (1 - z**p) ** (1 / p)
    assert schatten_norm(thermal_state(z), p) == pytest.approx(expected, rel=1e-10)


def test_schatten_infinity_is_largest_eigenvalue():
    assert schatten_norm(thermal_state(0.3), math.inf) == pytest.approx(0.7)


def test_non_hermitian_matrix_rejected():
    m = np.array([[0.5, 0.1], [0.0, 0.5]], dtype=complex)
    with pytest.raises(NotAStateError):
        DensityOperator(FockCutoff(2), m)


def test_negative_eigenvalue_rejected():
    with pytest.raises(NotAStateError):
        DensityOperator(FockCutoff(2), np.diag([1.1, -0.1]).astype(complex))


def test_trace_beyond_tail_rejected():
    with pytest.raises(NotAStateError):
        DensityOperator(FockCutoff(2), np.diag([0.5, 0.4]).astype(complex))
    DensityOperator(FockCutoff(2), np.diag([0.5, 0.4]).astype(complex), tail_bound=0.1)


def test_g_values():
    assert g(0.0) == 0.0
    assert g(1.0) == pytest.approx(TWO_LN2, abs=1e-15)
    with pytest.raises(DomainError):
        g(-1.0)


@given(st.floats(min_value=0.0, max_value=40.0))
def test_g_inverse_roundtrip(S):
    E = g_inv(S)
    assert g(E) == pytest.approx(S, abs=1e-12, rel=1e-12)


def test_bound_f_at_thermal_half():
    assert bound_f(TWO_LN2) == pytest.approx(LN2_PLUS_1, abs=1e-12)
    assert bound_f(0.0) == 1.0


def test_spectrum_must_be_nonincreasing():
    with pytest.raises(DomainError):
        Spectrum(np.array([0.2, 0.8]))
    assert Spectrum.from_values([0.2, 0.8]).probs.tolist() == [0.8, 0.2]


@pytest.mark.parametrize("alpha", [0.0, 0.7 - 0.3j, 2.5j])
def test_coherent_overlap(alpha):
    cut = FockCutoff(60)
    beta = 0.4 + 0.9j
    ov = np.vdot(coherent_vector(alpha, cut), coherent_vector(beta, cut))
    assert abs(ov) ** 2 == pytest.approx(math.exp(-abs(alpha - beta) ** 2), rel=1e-12)


def test_coherent_tail_guard():
    with pytest.raises(TruncationError):
        coherent_vector(5.0, FockCutoff(4))
    assert coherent_tail(0.0, FockCutoff(3)) == 0.0


@pytest.mark.parametrize("alpha", [0.3, 1.5 + 0.5j, 3.0j])
def test_displacement_matches_expm_on_large_space(alpha):
    big = 160
    a = np.diag(np.sqrt(np.arange(1, big)), 1)
    ref = expm(alpha * a.T - np.conj(alpha) * a)[:20, :20]
    got = displacement_matrix(alpha, FockCutoff(20))
    assert np.max(np.abs(got - ref)) < 1e-12


def test_displacement_of_vacuum_is_coherent():
    cut = FockCutoff(40)
    d = displacement_matrix(1.2 - 0.4j, cut)
    assert np.allclose(d[:, 0], coherent_vector(1.2 - 0.4j, cut), atol=1e-13)


def test_haar_unitary_is_unitary():
    u = haar_unitary(7, np.random.default_rng(0))
    assert np.allclose(u @ u.conj().T, np.eye(7), atol=1e-13)


def test_isospectral_state_keeps_spectrum():
    spec = Spectrum.thermal(0.5, 10)
    rho = random_isospectral_state(spec, 12, seed=3)
    lam = np.sort(rho.eigenvalues())[::-1]
    assert np.allclose(lam[:10], spec.probs, atol=1e-13)


def test_random_state_is_seed_reproducible():
    a, b = random_state(6, 11), random_state(6, 11)
    assert np.array_equal(a.matrix, b.matrix)


def test_passive_rearrangement_sorts_spectrum():
    rho = random_state(6, 2)
    p = passive_rearrangement(rho)
    d = np.real(np.diag(p.matrix))
    assert np.all(np.diff(d) <= 0)
    assert von_neumann_entropy(p) == pytest.approx(von_neumann_entropy(rho), abs=1e-12)


def test_tensor_and_partial_trace():
    a, b = thermal_state(0.3, 6), fock_state(1, 6)
    ab = tensor(a, b)
    assert ab.modes == 2
    assert np.allclose(partial_trace_last(ab).matrix, a.matrix * b.trace)


def test_fidelity_and_trace_distance():
    a, b = thermal_state(0.2, 30), thermal_state(0.2, 30)
    assert fidelity(a, b) == pytest.approx(1.0, abs=1e-12)
    assert trace_distance(fock_state(0, 3), fock_state(1, 3)) == pytest.approx(2.0)


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=2, max_value=10), st.integers(min_value=0, max_value=2**31))
def test_random_states_are_valid(dim, seed):
    rho = random_state(dim, seed)
    rho.check()
    assert 0.0 <= von_neumann_entropy(rho) <= math.log(dim) + 1e-12
