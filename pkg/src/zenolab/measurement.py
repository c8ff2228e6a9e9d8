"""Pulsed and continuous measurement models and their effective decay rates.

Pulsed: N projective checks at spacing ``tau = t/N`` give ``p(tau)**N``.
Continuous: the lower level of a Rabi pair is absorbed at rate ``2V``,

    H = [[0, Omega], [Omega, -2iV]],

whose survival amplitude has a slow and a fast exponential,

    A(t) = 1/2 (1 + V/h) exp(-(V-h)t) + 1/2 (1 - V/h) exp(-(V+h)t),
    h = sqrt(V^2 - Omega^2)   (principal branch, complex below V = Omega).
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DivergentRateError, InvalidInputError, RegimeError, RegimeWarning
from .qdyn import OperatorMatrix, StateVector, moments, survival_amplitude, survival_probability
from .tolerances import DEFAULT_TOLERANCES, Tolerances

__all__ = [
    "PulseSchedule",
    "TwoLevelAbsorptive",
    "EffectiveRate",
    "ContinuousRate",
    "pulsed_survival",
    "pulsed_survival_series",
    "effective_rate_pulsed",
    "small_tau_rate",
    "absorptive_amplitude",
    "absorptive_components",
    "slow_pole_term",
    "fast_pole_term",
    "effective_rate_continuous",
    "tau_from_strength",
    "strength_from_tau",
]

# below this |h t| the sinh(ht)/h form is summed as a series
_SMALL_HT = 1e-3


@dataclass(frozen=True)
class PulseSchedule:
    """N equally spaced projective measurements over ``total_time``."""

    total_time: float
    pulses: int

    def __post_init__(self):
        if isinstance(self.pulses, bool) or int(self.pulses) != self.pulses or self.pulses < 1:
            raise InvalidInputError(f"number of pulses must be an integer >= 1, got {self.pulses!r}")
        if not math.isfinite(self.total_time) or self.total_time < 0:
            raise InvalidInputError(f"total time must be finite and >= 0, got {self.total_time!r}")
        object.__setattr__(self, "pulses", int(self.pulses))

    @property
    def tau(self) -> float:
        return self.total_time / self.pulses

    @property
    def tau_exact(self) -> Fraction:
        # tau * N == t holds exactly for the rational form
        return Fraction(self.total_time) / self.pulses


def pulsed_survival(
    h: OperatorMatrix, psi0: StateVector, schedule: PulseSchedule, tol: Tolerances = DEFAULT_TOLERANCES
) -> float:
    """``p(t/N)**N`` for N ideal projections onto ``psi0``."""
    if not h.hermitian:
        raise InvalidInputError("pulsed measurements are defined here for Hermitian Hamiltonians")
    if schedule.total_time == 0:
        return 1.0
    return survival_probability(h, psi0, schedule.tau, tol) ** schedule.pulses


def pulsed_survival_series(
    h: OperatorMatrix, psi0: StateVector, t: float, n_list, tol: Tolerances = DEFAULT_TOLERANCES
) -> list[tuple[int, float]]:
    return [(int(n), pulsed_survival(h, psi0, PulseSchedule(t, n), tol)) for n in n_list]


@dataclass(frozen=True)
class EffectiveRate:
    tau: float
    gamma_eff: float
    survival: float


def effective_rate_pulsed(
    h: OperatorMatrix, psi0: StateVector, tau: float, tol: Tolerances = DEFAULT_TOLERANCES
) -> EffectiveRate:
    """``gamma_eff(tau) = -log p(tau) / tau``, straight from the definition.

    Measuring at a zero of the survival amplitude makes the rate infinite and
    raises :class:`DivergentRateError`.
    """
    if not tau > 0 or not math.isfinite(tau):
        raise InvalidInputError(f"measurement interval must be positive and finite, got {tau!r}")
    amp = survival_amplitude(h, psi0, tau, tol)
    if abs(amp) <= tol.survival_zero:
        raise DivergentRateError(
            f"survival probability vanishes at tau={tau!r}; effective rate diverges", residual=abs(amp) ** 2
        )
    p = abs(amp) ** 2
    return EffectiveRate(tau=tau, gamma_eff=-math.log(p) / tau, survival=p)


def small_tau_rate(h: OperatorMatrix, psi0: StateVector, tau: float) -> float:
    """Leading small-tau rate ``tau / tau_Z**2``."""
    return tau * moments(h, psi0).variance.real


@dataclass(frozen=True)
class TwoLevelAbsorptive:
    """Rabi pair whose lower level is absorbed: ``[[0, Omega], [Omega, -2iV]]``."""

    omega: float
    v: float

    def __post_init__(self):
        if not (math.isfinite(self.omega) and self.omega > 0):
            raise InvalidInputError(f"Rabi frequency must be positive and finite, got {self.omega!r}")
        if not (math.isfinite(self.v) and self.v >= 0):
            raise InvalidInputError(f"absorption strength must be finite and >= 0, got {self.v!r}")

    @property
    def h(self) -> complex:
        return cmath.sqrt(complex(self.v**2 - self.omega**2))

    def hamiltonian(self) -> OperatorMatrix:
        return OperatorMatrix(np.array([[0, self.omega], [self.omega, -2j * self.v]], dtype=complex))


def _sinhc(z):
    """sinh(z)/z, with the removable point handled by its series."""
    z = np.asarray(z, dtype=complex)
    out = np.empty_like(z)
    small = np.abs(z) < _SMALL_HT
    zs = z[small]
    out[small] = 1 + zs**2 / 6 + zs**4 / 120
    zl = z[~small]
    out[~small] = np.sinh(zl) / zl
    return out


def absorptive_components(sys: TwoLevelAbsorptive, t):
    """Amplitudes ``(x, y)`` on ``|+>`` and ``|->`` starting from ``|+>``.

    Near ``h t = 0`` the ``cosh``/``sinhc`` form is used (this also covers the
    degenerate point ``V = Omega``, where ``x = exp(-Vt)(1 + Vt)``); elsewhere
    the two-exponential form, which cannot overflow for large ``V t``.
    """
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0) or not np.all(np.isfinite(t_arr)):
        raise InvalidInputError("times must be finite and non-negative")
    h, v, om = sys.h, sys.v, sys.omega
    ht = h * t_arr
    x = np.empty(t_arr.shape, dtype=complex)
    y = np.empty(t_arr.shape, dtype=complex)
    small = np.abs(ht) < _SMALL_HT
    if np.any(small):
        ts = t_arr[small]
        damp = np.exp(-v * ts)
        sc = ts * _sinhc(h * ts)
        x[small] = damp * (np.cosh(h * ts) + v * sc)
        y[small] = -1j * om * damp * sc
    if np.any(~small):
        tl = t_arr[~small]
        slow = np.exp(-(v - h) * tl)
        fast = np.exp(-(v + h) * tl)
        x[~small] = 0.5 * (1 + v / h) * slow + 0.5 * (1 - v / h) * fast
        y[~small] = -1j * om * (slow - fast) / (2 * h)
    if np.ndim(t) == 0:
        return complex(x), complex(y)
    return x, y


def absorptive_amplitude(sys: TwoLevelAbsorptive, t):
    """Survival amplitude of ``|+>`` under the absorptive Hamiltonian."""
    return absorptive_components(sys, t)[0]


def slow_pole_term(sys: TwoLevelAbsorptive, t):
    h = sys.h
    return 0.5 * (1 + sys.v / h) * np.exp(-(sys.v - h) * np.asarray(t, dtype=float))


def fast_pole_term(sys: TwoLevelAbsorptive, t):
    h = sys.h
    return 0.5 * (1 - sys.v / h) * np.exp(-(sys.v + h) * np.asarray(t, dtype=float))


@dataclass(frozen=True)
class ContinuousRate:
    """Decay rate of the survival probability under continuous absorption.

    ``asymptotic`` is ``Omega**2 / V``; ``exact`` is the slow-pole rate
    ``2(V - h)``.
    """

    asymptotic: float
    exact: float


def effective_rate_continuous(sys: TwoLevelAbsorptive) -> ContinuousRate:
    if sys.v <= sys.omega:
        raise RegimeError(
            f"continuous-measurement rate needs V > Omega (got V={sys.v!r}, Omega={sys.omega!r})"
        )
    if sys.v < 5 * sys.omega:
        warnings.warn(
            f"V/Omega = {sys.v / sys.omega:.3g} < 5: Omega^2/V is a poor approximation",
            RegimeWarning,
            stacklevel=2,
        )
    h = sys.h.real
    # V - h without cancellation
    exact = 2 * sys.omega**2 / (sys.v + h)
    return ContinuousRate(asymptotic=sys.omega**2 / sys.v, exact=exact)


def tau_from_strength(v: float) -> float:
    """Pulse interval matching a continuous measurement of strength V (V ~ 1/tau)."""
    if not (math.isfinite(v) and v > 0):
        raise InvalidInputError(f"measurement strength must be positive and finite, got {v!r}")
    return 1.0 / v


def strength_from_tau(tau: float) -> float:
    if not (math.isfinite(tau) and tau > 0):
        raise InvalidInputError(f"measurement interval must be positive and finite, got {tau!r}")
    return 1.0 / tau
