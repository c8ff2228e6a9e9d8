import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zenolab.errors import ContractViolationError, InvalidInputError, NumericFailureError
from zenolab.qdyn import (
    MINUS,
    PLUS,
    OperatorMatrix,
    StateVector,
    evolve,
    expm_taylor,
    moments,
    pauli,
    propagator,
    short_time_check,
    survival_amplitude,
    survival_probability,
    survival_series,
)
from zenolab.oracles import richardson_second_derivative
from zenolab.tolerances import DEFAULT_TOLERANCES

from conftest import random_hermitian

ABSORPTIVE = OperatorMatrix(np.array([[0, 1], [1, -20j]]))


def eig_expm(h, t):
    w, v = np.linalg.eigh(h)
    return v @ np.diag(np.exp(-1j * w * t)) @ v.conj().T


# construction


def test_state_vector_is_read_only():
    psi = StateVector([1, 0])
    with pytest.raises(ValueError):
        psi.components[0] = 2


def test_state_vector_rejects_bad_input():
    with pytest.raises(InvalidInputError):
        StateVector([])
    with pytest.raises(InvalidInputError):
        StateVector([1, np.nan])
    with pytest.raises(InvalidInputError):
        StateVector.basis(2, 2)


def test_normalized_state():
    psi = StateVector.normalized([3, 4j])
    assert psi.is_normalized()
    assert psi.dim == 2


def test_hermitian_flag_detected_and_checked():
    assert pauli(1).hermitian
    assert not ABSORPTIVE.hermitian
    with pytest.raises(InvalidInputError):
        OperatorMatrix(np.array([[0, 1], [0, 0]]), hermitian=True)


def test_operator_rejects_non_square_and_non_finite():
    with pytest.raises(InvalidInputError):
        OperatorMatrix(np.zeros((2, 3)))
    with pytest.raises(InvalidInputError):
        OperatorMatrix(np.array([[np.inf, 0], [0, 1]]))


# propagator


def test_zero_generator_gives_identity():
    u = propagator(OperatorMatrix(np.zeros((2, 2))), 7.0)
    assert np.allclose(u.entries, np.eye(2), atol=1e-15)


def test_rabi_propagator_at_pi():
    u = propagator(pauli(1, 1.0), math.pi).entries
    assert u[0, 0] == pytest.approx(-1, abs=1e-14)
    assert abs(u[0, 1]) < 1e-14


def test_random_hermitian_propagator_matches_eigendecomposition():
    h = random_hermitian(3, 3)
    u = propagator(OperatorMatrix(h), 0.3).entries
    assert np.max(np.abs(u - eig_expm(h, 0.3))) < 1e-10


def test_taylor_path_matches_eigendecomposition_for_hermitian_input():
    h = random_hermitian(11, 4)
    u = expm_taylor(-1j * 2.5 * h)
    assert np.max(np.abs(u - eig_expm(h, 2.5))) < 1e-10


def test_taylor_reports_residual_on_non_convergence():
    tol = DEFAULT_TOLERANCES.replace(expm_max_terms=2)
    with pytest.raises(NumericFailureError) as info:
        expm_taylor(np.array([[0, 1], [1, 0]]) * 0.4j, tol)
    assert info.value.residual > 0


def test_propagator_rejects_non_finite_time():
    with pytest.raises(InvalidInputError):
        propagator(pauli(1), math.inf)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000), t1=st.floats(-3, 3), t2=st.floats(-3, 3))
def test_propagator_composition(seed, t1, t2):
    h = OperatorMatrix(random_hermitian(seed, 3))
    lhs = propagator(h, t1 + t2).entries
    rhs = propagator(h, t2).entries @ propagator(h, t1).entries
    assert np.max(np.abs(lhs - rhs)) < 1e-9


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000), t=st.floats(-20, 20))
def test_hermitian_evolution_preserves_norm(seed, t):
    h = OperatorMatrix(random_hermitian(seed, 4))
    psi = StateVector.normalized(np.arange(1, 5) + 1j)
    assert abs(evolve(h, psi, t).norm2 - 1) < 1e-10


def test_optical_potential_shrinks_norm():
    h = OperatorMatrix(random_hermitian(5, 3)).with_optical_potential(0.2)
    psi = StateVector.normalized([1, 1j, 0.5])
    norms = [evolve(h, psi, t).norm2 for t in np.linspace(0, 5, 21)]
    assert all(b <= a + 1e-10 for a, b in zip(norms, norms[1:]))


# survival


def test_survival_at_zero_is_one():
    h = OperatorMatrix(random_hermitian(1, 3))
    assert survival_amplitude(h, StateVector.basis(3, 1), 0.0) == pytest.approx(1, abs=1e-14)


def test_rabi_amplitude():
    assert survival_amplitude(pauli(1), PLUS, 1.0) == pytest.approx(math.cos(1.0), abs=1e-14)


def test_rabi_probability_vanishes_at_quarter_period():
    assert survival_probability(pauli(1), PLUS, math.pi / 2) < 1e-12


def test_absorptive_amplitude_and_probability():
    # oracle: scipy.linalg.expm of the same matrix
    assert survival_amplitude(ABSORPTIVE, PLUS, 1.0) == pytest.approx(0.9535056881224355, abs=1e-12)
    assert survival_probability(ABSORPTIVE, PLUS, 1.0) == pytest.approx(0.9091730972818393, abs=1e-12)


def test_survival_rejects_mismatch_and_unnormalized():
    with pytest.raises(InvalidInputError):
        survival_amplitude(pauli(1), StateVector.basis(3, 0), 1.0)
    with pytest.raises(InvalidInputError):
        survival_amplitude(pauli(1), StateVector([1, 1]), 1.0)


def test_survival_series_matches_pointwise():
    h = OperatorMatrix(random_hermitian(2, 4))
    psi = StateVector.normalized([1, 2, 3j, 4])
    t = np.linspace(0, 3, 7)
    amp, p = survival_series(h, psi, t)
    assert np.allclose(amp, [survival_amplitude(h, psi, x) for x in t], atol=1e-12)
    assert np.all(p <= 1 + 1e-10)


def test_scalar_optical_potential_factorizes():
    h = OperatorMatrix(random_hermitian(8, 3))
    psi = StateVector.normalized([1, 1, 1j])
    v = 0.3
    hv = h.with_optical_potential(v)
    for t in (0.1, 1.0, 4.0):
        expected = math.exp(-2 * v * t) * survival_probability(h, psi, t)
        assert survival_probability(hv, psi, t) == pytest.approx(expected, abs=1e-10)


def test_amplitude_linear_probability_quadratic():
    h = OperatorMatrix(random_hermitian(4, 3) + 2 * np.eye(3))
    psi = StateVector.normalized([1, 0.5, 0.2j])
    assert abs(moments(h, psi).mean) > 0.1
    dt = np.geomspace(1e-4, 1e-2, 9)
    amp, p = survival_series(h, psi, dt)
    slope_a = np.polyfit(np.log(dt), np.log(np.abs(1 - amp)), 1)[0]
    slope_p = np.polyfit(np.log(dt), np.log(1 - p), 1)[0]
    assert slope_a == pytest.approx(1.0, abs=0.05)
    assert slope_p == pytest.approx(2.0, abs=0.05)


# moments


def test_rabi_moments():
    m = moments(pauli(1, 2.0), PLUS)
    assert m.mean == pytest.approx(0, abs=1e-15)
    assert m.variance == pytest.approx(4.0)
    assert m.zeno_time == pytest.approx(0.5)


def test_eigenstate_has_infinite_zeno_time():
    h = OperatorMatrix(np.diag([1.0, 2.0, 3.0]))
    m = moments(h, StateVector.basis(3, 1))
    assert m.variance == 0
    assert m.zeno_time == math.inf


def test_variance_matches_short_time_curvature():
    h = OperatorMatrix(random_hermitian(4, 4))
    psi = StateVector.normalized([1, 1j, -1, 0.5])
    # p''(0) = -2 variance; the oracle differentiates p numerically
    second = richardson_second_derivative(lambda t: survival_probability(h, psi, t), 0.0, 1e-3)
    assert -second / 2 == pytest.approx(moments(h, psi).variance.real, abs=1e-6)


def test_hermitian_moments_are_real():
    m = moments(OperatorMatrix(random_hermitian(9, 5)), StateVector.normalized(np.ones(5)))
    assert abs(m.mean.imag) < 1e-12 and abs(m.variance.imag) < 1e-12
    assert m.variance.real >= -1e-12


def test_non_hermitian_moments_give_nan_zeno_time():
    m = moments(ABSORPTIVE, StateVector.normalized([1, 1]))
    assert m.variance.real < 0
    assert math.isnan(m.zeno_time)


# short-time table


def test_short_time_table_rabi():
    table = short_time_check(pauli(1), PLUS, [0.0, 1e-2])
    assert table.one_minus_p[1] == pytest.approx(1e-4, rel=1e-3)
    assert table.residuals[0] == 0
    assert table.residuals[1] <= 1e-7
    assert len(table.rows()) == 2


def test_short_time_rejects_non_hermitian():
    with pytest.raises(ContractViolationError):
        short_time_check(ABSORPTIVE, PLUS, [1e-3])
