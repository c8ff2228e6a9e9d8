"""Survival amplitude of a level embedded in a continuum, from its resolvent.

With no first-sheet singularities the Bromwich line can be pushed down onto
the real axis, where only the jump of ``1/(E - w0 - Sigma(E))`` across the
cut survives.  Writing ``Sigma(x + i0) = Delta(x) - i pi g^2(x)`` that jump
gives the spectral density

    S(x) = -(1/pi) Im 1/(x - w0 - Sigma(x + i0))
         = g^2(x) / ((x - w0 - Delta(x))^2 + (pi g^2(x))^2),

and the amplitude is its Fourier transform ``A(t) = int S(x) exp(-ixt) dx``.
``A(0) = 1`` is the completeness relation, so ``int S = 1`` is a check.

The pole part ``exp(-i E_pole t) / (1 - Sigma_II'(E_pole))`` is taken from
the resolvent module; the cut part is defined as what is left over.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import (
    ConsistencyError,
    InvalidInputError,
    NumericFailureError,
    RegimeError,
    ResolutionError,
    WindowError,
)
from .resolvent import (
    CONSTANT_LINE,
    TABULATED,
    FormFactor,
    PoleSolution,
    _quad,
    check_first_sheet,
    principal_value_tabulated,
    zeno_time_continuum,
)
from .tolerances import DEFAULT_TOLERANCES, Tolerances

__all__ = [
    "SpectralDensity",
    "SurvivalSeries",
    "RegimeFit",
    "spectral_density",
    "survival_from_spectrum",
    "decompose",
    "fit_regimes",
    "fit_power_law",
    "regime_time_grid",
    "weisskopf_wigner_error",
    "EXP_WINDOW_RATIO",
]

EXP_WINDOW_RATIO = 0.05
MAX_PANELS = 200_000
NODES_PER_PANEL = 10
_GRADED_LEVELS = 110  # endpoint panels are halved this many times
_GL = np.polynomial.legendre.leggauss(NODES_PER_PANEL)


@dataclass(frozen=True)
class SpectralDensity:
    form_factor: FormFactor
    omega0: float
    normalization: float

    def delta(self, x) -> np.ndarray:
        """Principal-value shift ``Re Sigma(x + i0)`` inside the support."""
        ff = self.form_factor
        x = np.asarray(x, dtype=float)
        if ff.kind == CONSTANT_LINE:
            return np.zeros_like(x)
        if ff.kind == TABULATED:
            return principal_value_tabulated(ff, x)
        with np.errstate(divide="ignore", invalid="ignore"):
            return ff.g0_sq * np.log((x - ff.omega_g) / (ff.omega_max - x))

    def __call__(self, x):
        ff = self.form_factor
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape)
        if ff.kind == CONSTANT_LINE:
            inside = np.ones(x.shape, dtype=bool)
        else:
            inside = (x > ff.omega_g) & (x < ff.omega_max)
        xi = x[inside]
        g2 = np.asarray(ff.g_sq(xi), dtype=float)
        with np.errstate(over="ignore", invalid="ignore"):
            den = (xi - self.omega0 - self.delta(xi)) ** 2 + (math.pi * g2) ** 2
            vals = np.where(np.isfinite(den) & (den > 0), g2 / den, 0.0)
        out[inside] = vals
        return float(out) if out.ndim == 0 else out


def _peak_width(ff: FormFactor, omega0: float) -> float:
    return 2 * math.pi * float(ff.g_sq(omega0))


def spectral_density(ff: FormFactor, omega0: float, tol: Tolerances = DEFAULT_TOLERANCES) -> SpectralDensity:
    """Build ``S(x)`` and check that it carries unit mass."""
    omega0 = float(omega0)
    if not ff.inside(omega0):
        raise RegimeError(f"w0={omega0!r} is not embedded in the continuum support {ff.support}")
    check_first_sheet(ff, omega0)
    sd = SpectralDensity(ff, omega0, math.nan)
    width = _peak_width(ff, omega0)
    if ff.kind == CONSTANT_LINE:
        pieces = [(-math.inf, omega0), (omega0, math.inf)]
    else:
        cuts = {ff.omega_g, ff.omega_max, omega0}
        for k in (1, 4, 16):
            cuts |= {c for c in (omega0 - k * width, omega0 + k * width) if ff.inside(c)}
        if ff.kind == TABULATED:
            cuts |= set(ff.grid)
        edges = sorted(cuts)
        pieces = list(zip(edges[:-1], edges[1:]))
    mass = sum(_quad(lambda x: sd(x), a, b, tol) for a, b in pieces)
    if abs(mass - 1.0) > tol.normalization:
        raise ConsistencyError(
            f"spectral density has mass {mass:.9g}, not 1: a first-sheet pole or a quadrature failure",
            residual=abs(mass - 1.0),
        )
    return SpectralDensity(ff, omega0, mass)


@dataclass(frozen=True, eq=False)
class SurvivalSeries:
    times: np.ndarray
    amplitude: np.ndarray
    probability: np.ndarray
    pole_part: np.ndarray | None = None
    cut_part: np.ndarray | None = None

    @property
    def has_decomposition(self) -> bool:
        return self.pole_part is not None and self.cut_part is not None

    def columns(self) -> list[str]:
        cols = ["t", "re_A", "im_A", "p"]
        if self.has_decomposition:
            cols += ["re_pole", "im_pole", "re_cut", "im_cut"]
        return cols

    def rows(self):
        for i, t in enumerate(self.times):
            a = self.amplitude[i]
            row = [float(t), a.real, a.imag, float(self.probability[i])]
            if self.has_decomposition:
                pp, cp = self.pole_part[i], self.cut_part[i]
                row += [pp.real, pp.imag, cp.real, cp.imag]
            yield tuple(row)


def _panels(sd: SpectralDensity, t_max: float, max_panels: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights over the support.

    Uniform panels no wider than ``pi / (4 t_max)`` (and fine enough for the
    resonance peak), with the two end panels split geometrically so the
    logarithmic endpoint behaviour of ``S`` is integrated accurately.
    """
    ff = sd.form_factor
    a, b = ff.omega_g, ff.omega_max
    limits = [ff.width / 256]
    if t_max > 0:
        limits.append(math.pi / (4 * t_max))
    peak = _peak_width(ff, sd.omega0)
    if peak > 0:
        limits.append(peak / 8)
    h = min(limits)
    n = int(math.ceil(ff.width / h))
    if n > max_panels:
        raise ResolutionError(
            f"t_max={t_max:.6g} needs {n} panels (cap {max_panels}); "
            "use fit_regimes on a shorter series for the long-time tail"
        )
    edges = np.linspace(a, b, n + 1)
    if ff.kind == TABULATED:
        edges = np.union1d(edges, np.asarray(ff.grid))
    h0, h1 = edges[1] - a, b - edges[-2]
    lo = list(edges[1:-2])
    hi = list(edges[2:-1])
    for k in range(_GRADED_LEVELS):
        lo += [a + h0 * 2.0 ** -(k + 1), b - h1 * 2.0**-k]
        hi += [a + h0 * 2.0**-k, b - h1 * 2.0 ** -(k + 1)]
    lo = np.asarray(lo)
    hi = np.asarray(hi)
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    gx, gw = _GL
    x = (mid[:, None] + half[:, None] * gx).ravel()
    w = (half[:, None] * gw).ravel()
    return x, w


def _fourier(x: np.ndarray, sw: np.ndarray, times: np.ndarray) -> np.ndarray:
    out = np.empty(times.size, dtype=complex)
    chunk = max(1, (1 << 21) // max(x.size, 1))
    for start in range(0, times.size, chunk):
        tt = times[start : start + chunk]
        out[start : start + chunk] = np.exp(-1j * np.outer(tt, x)) @ sw
    return out


def _check_times(times) -> np.ndarray:
    t = np.asarray(times, dtype=float).ravel()
    if t.size == 0:
        raise InvalidInputError("time grid is empty")
    if not np.all(np.isfinite(t)) or np.any(t < 0):
        raise InvalidInputError("times must be finite and non-negative")
    if np.any(np.diff(t) <= 0):
        raise InvalidInputError("times must be strictly increasing")
    return t


def survival_from_spectrum(
    sd: SpectralDensity, times, max_panels: int = MAX_PANELS, tol: Tolerances = DEFAULT_TOLERANCES
) -> SurvivalSeries:
    """``A(t) = int S(x) exp(-ixt) dx`` by fixed-panel Gauss-Legendre quadrature."""
    t = _check_times(times)
    if not math.isfinite(sd.form_factor.width):
        raise InvalidInputError("spectral inversion needs a finite support (the constant line is exactly exponential)")
    x, w = _panels(sd, float(t.max()), max_panels)
    sw = w * sd(x)
    discrete_mass = float(sw.sum())
    if abs(discrete_mass - sd.normalization) > 1e-6:
        raise NumericFailureError(
            f"panel rule mass {discrete_mass:.12g} disagrees with adaptive mass {sd.normalization:.12g}",
            residual=abs(discrete_mass - sd.normalization),
        )
    amp = _fourier(x, sw, t)
    return SurvivalSeries(times=t, amplitude=amp, probability=np.abs(amp) ** 2)


def _same_model(sd: SpectralDensity, pole: PoleSolution) -> None:
    if pole.form_factor != sd.form_factor or pole.omega0 != sd.omega0:
        raise InvalidInputError("pole solution and spectral density describe different models")


def pole_amplitude(pole: PoleSolution, times) -> np.ndarray:
    t = np.asarray(times, dtype=float)
    return np.exp(-1j * pole.e_pole * t) / (1 - pole.sigma_prime)


def decompose(sd: SpectralDensity, pole: PoleSolution, times, max_panels: int = MAX_PANELS) -> SurvivalSeries:
    """Series with the pole contribution and the remainder (cut) stored separately."""
    _same_model(sd, pole)
    series = survival_from_spectrum(sd, times, max_panels)
    pole_part = pole_amplitude(pole, series.times)
    return SurvivalSeries(
        times=series.times,
        amplitude=series.amplitude,
        probability=series.probability,
        pole_part=pole_part,
        cut_part=series.amplitude - pole_part,
    )


def weisskopf_wigner_error(sd: SpectralDensity, pole: PoleSolution, times) -> np.ndarray:
    """``|p_exact(t) - Z exp(-gamma t)|`` on the given grid."""
    _same_model(sd, pole)
    series = survival_from_spectrum(sd, times)
    return np.abs(series.probability - pole.z * np.exp(-pole.gamma * series.times))


def regime_time_grid(sd: SpectralDensity, pole: PoleSolution, tail_groups: int = 12, burst: int = 64) -> np.ndarray:
    """A grid resolving the Zeno, exponential and power-law regimes.

    Dense up to ``0.1 tau_Z``, uniform to ``20/gamma``, then ``tail_groups``
    short bursts between ``25/gamma`` and ``100/gamma``.  Each burst spans
    eight periods of the edge beating ``2 pi / width`` so that averaging over
    a burst removes the oscillation.
    """
    _same_model(sd, pole)
    ff = sd.form_factor
    tau_z = zeno_time_continuum(ff).tau_z
    period = 2 * math.pi / ff.width
    zeno = np.linspace(0.0, 0.1 * tau_z, 41)
    step = min(tau_z, period) / 32
    mid = np.arange(zeno[-1] + step, 20 / pole.gamma, step)
    centres = np.geomspace(25 / pole.gamma, 100 / pole.gamma, tail_groups)
    bursts = [c + np.linspace(0.0, 8 * period, burst, endpoint=False) for c in centres]
    return np.concatenate([zeno, mid, *bursts])


@dataclass(frozen=True)
class RegimeFit:
    """Fits of the three decay regimes of a survival series.

    Windows are ``(t_lo, t_hi)`` pairs, disjoint and in time order; residuals
    are root-mean-square misfits of each regression.
    """

    zeno_coefficient: float
    zeno_time: float
    exp_rate: float
    exp_intercept: float
    power_exponent: float
    crossover_times: tuple[float, float]
    fit_windows: dict[str, tuple[float, float]] = field(default_factory=dict)
    residuals: dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "zeno_coefficient": self.zeno_coefficient,
            "zeno_time": self.zeno_time,
            "exp_rate": self.exp_rate,
            "exp_intercept": self.exp_intercept,
            "power_exponent": self.power_exponent,
            "crossover_times": list(self.crossover_times),
            "fit_windows": {k: list(v) for k, v in self.fit_windows.items()},
            "residuals": dict(self.residuals),
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "RegimeFit":
        return cls(
            zeno_coefficient=float(d["zeno_coefficient"]),
            zeno_time=float(d["zeno_time"]),
            exp_rate=float(d["exp_rate"]),
            exp_intercept=float(d["exp_intercept"]),
            power_exponent=float(d["power_exponent"]),
            crossover_times=tuple(float(v) for v in d["crossover_times"]),
            fit_windows={k: tuple(float(x) for x in v) for k, v in d["fit_windows"].items()},
            residuals={k: float(v) for k, v in d["residuals"].items()},
        )


def _groups(t: np.ndarray, n_bins: int) -> list[np.ndarray]:
    """Index groups for tail averaging: gap-separated clusters, else log bins."""
    if t.size < 3:
        return []
    gaps = np.diff(t)
    split = np.where(gaps > 10 * np.median(gaps))[0] + 1
    clusters = np.split(np.arange(t.size), split)
    if len(clusters) >= 3:
        return clusters
    edges = np.geomspace(t[0], t[-1] * (1 + 1e-12), n_bins + 1)
    which = np.clip(np.searchsorted(edges, t, side="right") - 1, 0, n_bins - 1)
    return [np.where(which == k)[0] for k in range(n_bins) if np.any(which == k)]


def fit_power_law(times, probability, n_bins: int = 12) -> tuple[float, float, float]:
    """Log-log slope of group-averaged ``p`` (oscillations average out).

    Returns ``(exponent, intercept, rms_residual)``.
    """
    t = np.asarray(times, dtype=float)
    p = np.asarray(probability, dtype=float)
    groups = _groups(t, n_bins)
    if len(groups) < 3:
        raise WindowError("power-law fit needs at least three groups of tail points")
    tm = np.array([t[g].mean() for g in groups])
    pm = np.array([p[g].mean() for g in groups])
    if np.any(pm <= 0):
        raise WindowError("power-law fit met a vanishing group-averaged probability")
    coef = np.polyfit(np.log(tm), np.log(pm), 1)
    resid = np.log(pm) - np.polyval(coef, np.log(tm))
    return float(coef[0]), float(coef[1]), float(np.sqrt(np.mean(resid**2)))


def _fit_zeno(t: np.ndarray, p: np.ndarray) -> tuple[float, float, float]:
    pos = t > 0
    if not np.any(pos):
        raise WindowError("no positive times: Zeno regime missing")
    t1 = t[pos][0]
    c = (1 - p[pos][0]) / t1**2
    if not c > 0:
        raise WindowError("survival does not drop at the first sample: Zeno regime unresolved")
    for _ in range(6):
        t_end = 0.1 * c**-0.5
        sel = pos & (t <= t_end)
        if np.count_nonzero(sel) < 3:
            raise WindowError(f"fewer than three samples in the Zeno window t <= {t_end:.4g}")
        x2 = t[sel] ** 2
        c_new = float(np.sum((1 - p[sel]) * x2) / np.sum(x2 * x2))
        if abs(c_new - c) <= 1e-12 * c:
            c = c_new
            break
        c = c_new
    t_end = 0.1 * c**-0.5
    sel = pos & (t <= t_end)
    resid = (1 - p[sel]) - c * t[sel] ** 2
    return c, float(t[sel].max()), float(np.sqrt(np.mean(resid**2)))


def fit_regimes(series: SurvivalSeries, n_bins: int = 12) -> RegimeFit:
    """Fit the quadratic start, the exponential middle and the power-law tail.

    * Zeno: ``1 - p = c t^2`` on ``t <= 0.1 tau_Z`` (``tau_Z = c**-1/2``,
      found self-consistently).
    * Exponential: ``log p = log Z - gamma t`` on the longest run after the
      Zeno window where ``|cut| / |pole| < 0.05``.
    * Power law: after the exponential window, from the first group where the
      pole part is below a tenth of the cut part for good, the log-log slope
      of group-averaged ``p``.
    """
    if not series.has_decomposition:
        raise WindowError("exponential window selection needs pole/cut channels (use decompose)")
    t, p = series.times, series.probability
    c, zeno_end, zeno_res = _fit_zeno(t, p)

    ratio = np.abs(series.cut_part) / np.abs(series.pole_part)
    ok = (ratio < EXP_WINDOW_RATIO) & (t > zeno_end)
    idx = np.where(ok)[0]
    if idx.size < 3:
        raise WindowError("exponential window missing: |cut|/|pole| never stays below 0.05")
    runs = np.split(idx, np.where(np.diff(idx) > 1)[0] + 1)
    run = max(runs, key=len)
    if run.size < 3:
        raise WindowError("exponential window too short")
    te, pe = t[run], p[run]
    coef = np.polyfit(te, np.log(pe), 1)
    exp_res = float(np.sqrt(np.mean((np.log(pe) - np.polyval(coef, te)) ** 2)))

    tail = np.arange(run[-1] + 1, t.size)
    if tail.size < 3:
        raise WindowError("power-law window missing: series ends inside the exponential regime")
    groups = [tail[g] for g in _groups(t[tail], n_bins)]
    good = [
        np.sqrt(np.mean(np.abs(series.pole_part[g]) ** 2)) <= 0.1 * np.sqrt(np.mean(np.abs(series.cut_part[g]) ** 2))
        for g in groups
    ]
    start = None
    for k in range(len(groups)):
        if all(good[k:]):
            start = k
            break
    if start is None or len(groups) - start < 3:
        raise WindowError("power-law window missing: the pole part never becomes negligible over three groups")
    sel = np.concatenate(groups[start:])
    slope, _, power_res = fit_power_law(t[sel], p[sel], n_bins)
    t_power = float(t[sel].min())
    return RegimeFit(
        zeno_coefficient=c,
        zeno_time=c**-0.5,
        exp_rate=-float(coef[0]),
        exp_intercept=float(math.exp(coef[1])),
        power_exponent=slope,
        crossover_times=(zeno_end, t_power),
        fit_windows={
            "zeno": (float(t[t > 0][0]), zeno_end),
            "exponential": (float(te[0]), float(te[-1])),
            "power": (t_power, float(t[sel].max())),
        },
        residuals={"zeno": zeno_res, "exponential": exp_res, "power": power_res},
    )
