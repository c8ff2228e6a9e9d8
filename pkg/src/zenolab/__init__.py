"""Survival probabilities, quantum Zeno dynamics and resonance decay laws."""

from .errors import *  # noqa: F401,F403
from .qdyn import (
    MINUS,
    PLUS,
    MomentReport,
    OperatorMatrix,
    ShortTimeTable,
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
from .measurement import (
    ContinuousRate,
    EffectiveRate,
    PulseSchedule,
    TwoLevelAbsorptive,
    absorptive_amplitude,
    absorptive_components,
    effective_rate_continuous,
    effective_rate_pulsed,
    pulsed_survival,
    pulsed_survival_series,
    small_tau_rate,
    strength_from_tau,
    tau_from_strength,
)
from .continuum import FieldModel, FieldSeries, memory_kernel_check, reduced_dynamics, simulate_field
from .resolvent import (
    FormFactor,
    PoleSolution,
    Sheet,
    boundary_values,
    find_pole,
    golden_rule,
    principal_value,
    second_sheet,
    self_energy,
    weisskopf_wigner_amplitude,
    zeno_time_continuum,
)
from .inversion import (
    RegimeFit,
    SpectralDensity,
    SurvivalSeries,
    decompose,
    fit_regimes,
    regime_time_grid,
    spectral_density,
    survival_from_spectrum,
    weisskopf_wigner_error,
)
from .tolerances import DEFAULT_TOLERANCES, Tolerances

__version__ = "0.1.0"
