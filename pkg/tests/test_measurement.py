import math
import warnings
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zenolab.errors import DivergentRateError, InvalidInputError, RegimeError, RegimeWarning
from zenolab.measurement import (
    PulseSchedule,
    TwoLevelAbsorptive,
    absorptive_amplitude,
    absorptive_components,
    effective_rate_continuous,
    effective_rate_pulsed,
    fast_pole_term,
    pulsed_survival,
    pulsed_survival_series,
    slow_pole_term,
    small_tau_rate,
    strength_from_tau,
    tau_from_strength,
)
from zenolab.oracles import repeated_projection_survival
from zenolab.qdyn import (
    PLUS,
    OperatorMatrix,
    StateVector,
    pauli,
    propagator,
    survival_amplitude,
    survival_probability,
)

from conftest import random_hermitian

SIGMA1 = pauli(1, 1.0)


# pulse schedules


def test_schedule_validation():
    with pytest.raises(InvalidInputError):
        PulseSchedule(1.0, 0)
    with pytest.raises(InvalidInputError):
        PulseSchedule(1.0, 2.5)
    with pytest.raises(InvalidInputError):
        PulseSchedule(-1.0, 3)


def test_schedule_exact_tau():
    s = PulseSchedule(1.0, 3)
    assert s.tau_exact * 3 == Fraction(1.0)
    assert s.tau == pytest.approx(1 / 3)


def test_single_pulse_is_rabi():
    assert pulsed_survival(SIGMA1, PLUS, PulseSchedule(1.0, 1)) == pytest.approx(math.cos(1) ** 2, abs=1e-14)
    assert math.cos(1) ** 2 == pytest.approx(0.291927, abs=1e-6)


def test_zero_time_survives():
    h = OperatorMatrix(random_hermitian(0, 3))
    assert pulsed_survival(h, StateVector.basis(3, 0), PulseSchedule(0.0, 17)) == 1.0


def test_four_pulses_match_repeated_projection():
    # independent oracle: evolve, project, repeat
    oracle = repeated_projection_survival(SIGMA1, PLUS, 1.0, 4)
    assert oracle == pytest.approx(0.7767409281794002, abs=1e-12)
    assert pulsed_survival(SIGMA1, PLUS, PulseSchedule(1.0, 4)) == pytest.approx(oracle, abs=1e-12)


def test_pulsed_requires_hermitian():
    lossy = OperatorMatrix(np.array([[0, 1], [1, -1j]]))
    with pytest.raises(InvalidInputError):
        pulsed_survival(lossy, PLUS, PulseSchedule(1.0, 2))


def test_many_pulses_approach_gaussian_limit():
    [(n, p)] = pulsed_survival_series(SIGMA1, PLUS, 1.0, [10_000])
    assert p == pytest.approx(math.exp(-1 / n), abs=1e-3)


def test_series_single_pulse_matches_survival():
    [(_, p)] = pulsed_survival_series(SIGMA1, PLUS, 0.7, [1])
    assert p == pytest.approx(survival_probability(SIGMA1, PLUS, 0.7), abs=1e-15)


def test_doubling_sequence_increases():
    ps = [p for _, p in pulsed_survival_series(SIGMA1, PLUS, 1.0, [2**k for k in range(11)])]
    assert all(b > a for a, b in zip(ps, ps[1:]))


@pytest.mark.parametrize("n", [64, 128, 1000, 10_000])
def test_zeno_bound(n):
    loss = 1 - pulsed_survival(SIGMA1, PLUS, PulseSchedule(1.0, n))
    assert loss <= 1.1 / n


@settings(max_examples=30, deadline=None)
@given(t=st.floats(0.01, 5.0), n=st.integers(1, 200))
def test_pulsed_survival_is_exponential_in_effective_rate(t, n):
    s = PulseSchedule(t, n)
    try:
        rate = effective_rate_pulsed(SIGMA1, PLUS, s.tau)
    except DivergentRateError:
        return
    assert pulsed_survival(SIGMA1, PLUS, s) == pytest.approx(math.exp(-rate.gamma_eff * t), rel=1e-12, abs=1e-300)


# effective rates


def test_effective_rate_small_tau():
    r = effective_rate_pulsed(SIGMA1, PLUS, 0.01)
    assert r.gamma_eff == pytest.approx(0.01, rel=1e-4)
    assert small_tau_rate(SIGMA1, PLUS, 0.01) == pytest.approx(0.01)


def test_effective_rate_over_tau_tends_to_inverse_zeno_time_squared():
    taus = np.linspace(1e-3, 1e-2, 10)
    ratios = [effective_rate_pulsed(SIGMA1, PLUS, t).gamma_eff / t for t in taus]
    intercept = np.polyfit(taus**2, ratios, 1)[1]
    assert intercept == pytest.approx(1.0, rel=1e-3)


def test_rate_is_definition_not_leading_order():
    # -log cos^2(tau) / tau differs from tau at finite tau
    tau = 0.5
    r = effective_rate_pulsed(SIGMA1, PLUS, tau)
    assert r.gamma_eff == pytest.approx(-math.log(math.cos(tau) ** 2) / tau, rel=1e-13)
    assert abs(r.gamma_eff - tau) > 1e-2


def test_rate_diverges_at_survival_zero():
    with pytest.raises(DivergentRateError):
        effective_rate_pulsed(SIGMA1, PLUS, math.pi / 2)


def test_rate_rejects_non_positive_tau():
    with pytest.raises(InvalidInputError):
        effective_rate_pulsed(SIGMA1, PLUS, 0.0)


# absorptive two-level system


def test_no_absorption_is_rabi():
    assert absorptive_amplitude(TwoLevelAbsorptive(1.0, 0.0), 1.0) == pytest.approx(math.cos(1.0), abs=1e-14)


def test_absorptive_matches_matrix_exponential():
    sys_ = TwoLevelAbsorptive(1.0, 10.0)
    a = absorptive_amplitude(sys_, 1.0)
    assert a == pytest.approx(0.9535056881224355, abs=1e-12)
    assert a == pytest.approx(survival_amplitude(sys_.hamiltonian(), PLUS, 1.0), abs=1e-12)


@pytest.mark.parametrize("v", [0.0, 0.3, 0.999, 1.0, 1.001, 2.0, 50.0])
def test_closed_form_matches_propagator(v):
    sys_ = TwoLevelAbsorptive(1.0, v)
    for t in (0.0, 1e-4, 0.5, 3.0):
        u = propagator(sys_.hamiltonian(), t).entries
        x, y = absorptive_components(sys_, t)
        assert x == pytest.approx(u[0, 0], abs=1e-11)
        assert y == pytest.approx(u[1, 0], abs=1e-11)


def test_degenerate_point_limit():
    t = np.linspace(0, 4, 9)
    x = absorptive_amplitude(TwoLevelAbsorptive(1.0, 1.0), t)
    assert np.allclose(x, np.exp(-t) * (1 + t), atol=1e-14)


def test_underdamped_maxima_decrease():
    t = np.linspace(0, 20, 4001)
    p = np.abs(absorptive_amplitude(TwoLevelAbsorptive(1.0, 0.4), t)) ** 2
    inner = np.where((p[1:-1] > p[:-2]) & (p[1:-1] > p[2:]))[0] + 1
    assert len(inner) >= 3
    assert np.all(np.diff(p[inner]) < 0)


def test_initial_slopes():
    dt = 1e-5
    p_abs = abs(absorptive_amplitude(TwoLevelAbsorptive(1.0, 3.0), dt)) ** 2
    assert abs((p_abs - 1) / dt) < 1e-3
    v = 3.0
    lossy = pauli(1).with_optical_potential(v)
    slope = (survival_probability(lossy, PLUS, dt) - 1) / dt
    assert slope == pytest.approx(-2 * v, rel=1e-3)


def test_fast_slow_split_bound():
    sys_ = TwoLevelAbsorptive(1.0, 4.0)
    t = np.linspace(0, 5, 101)
    gap = np.abs(absorptive_amplitude(sys_, t) - slow_pole_term(sys_, t))
    h = sys_.h
    bound = abs(0.5 * (1 - sys_.v / h)) * np.exp(-(sys_.v + h).real * t)
    assert np.all(gap <= bound + 1e-15)
    assert np.allclose(slow_pole_term(sys_, t) + fast_pole_term(sys_, t), absorptive_amplitude(sys_, t), atol=1e-14)


def test_large_times_do_not_overflow():
    x = absorptive_amplitude(TwoLevelAbsorptive(1.0, 1e4), 1e5)
    assert np.isfinite(x)


def test_absorptive_rejects_bad_input():
    with pytest.raises(InvalidInputError):
        TwoLevelAbsorptive(0.0, 1.0)
    with pytest.raises(InvalidInputError):
        TwoLevelAbsorptive(1.0, -1.0)
    with pytest.raises(InvalidInputError):
        absorptive_amplitude(TwoLevelAbsorptive(1.0, 1.0), -1.0)


# continuous measurement


def test_continuous_rate_v10():
    r = effective_rate_continuous(TwoLevelAbsorptive(1.0, 10.0))
    assert r.asymptotic == pytest.approx(0.1)
    assert r.exact == pytest.approx(2 * (10 - math.sqrt(99)), rel=1e-12)
    assert r.exact == pytest.approx(0.100252, abs=1e-6)


def test_continuous_rate_v100():
    r = effective_rate_continuous(TwoLevelAbsorptive(1.0, 100.0))
    assert abs(r.exact / r.asymptotic - 1) <= 3e-5


def test_rate_decreases_with_strength():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RegimeWarning)
        rates = [effective_rate_continuous(TwoLevelAbsorptive(1.0, v)).exact for v in (2.0, 10.0, 100.0)]
    assert rates[0] > rates[1] > rates[2]


def test_exact_rate_is_the_slow_decay():
    sys_ = TwoLevelAbsorptive(1.0, 10.0)
    t1, t2 = 30.0, 40.0
    p1, p2 = (abs(absorptive_amplitude(sys_, t)) ** 2 for t in (t1, t2))
    assert -math.log(p2 / p1) / (t2 - t1) == pytest.approx(effective_rate_continuous(sys_).exact, rel=1e-10)


def test_continuous_regime_checks():
    with pytest.raises(RegimeError):
        effective_rate_continuous(TwoLevelAbsorptive(1.0, 1.0))
    with pytest.warns(RegimeWarning):
        effective_rate_continuous(TwoLevelAbsorptive(1.0, 2.0))


def test_strength_interval_map():
    assert tau_from_strength(10.0) == pytest.approx(0.1)
    assert strength_from_tau(1.0) == 1.0
    with pytest.raises(InvalidInputError):
        tau_from_strength(0.0)
    with pytest.raises(InvalidInputError):
        strength_from_tau(0.0)


def test_pulsed_and_continuous_rates_agree_under_the_map():
    pulsed = effective_rate_pulsed(SIGMA1, PLUS, tau_from_strength(10.0)).gamma_eff
    continuous = effective_rate_continuous(TwoLevelAbsorptive(1.0, 10.0)).exact
    assert pulsed == pytest.approx(0.1, rel=0.05)
    assert continuous == pytest.approx(0.1, rel=0.05)
