"""Two-level system coupled to a flat one-dimensional boson continuum.

The field is truncated to the window [-W, W] and sampled by ``n`` uniformly
spaced modes.  With density amplitudes ``z_k`` (so that the field norm is
``sum |z_k|^2 dw``) the single-excitation Schroedinger equation is

    i x' = Omega y
    i y' = Omega x + g sum_k z_k dw
    i z_k' = w_k z_k + g y,            g = sqrt(Gamma / 2 pi).

Internally the integrator works with the normalized mode amplitudes
``c_k = sqrt(dw) z_k``, which couple with ``sqrt(Gamma dw / 2 pi)``.  As W
grows the ``(x, y)`` block approaches the non-Hermitian generator
``[[0, Omega], [Omega, -i Gamma / 2]]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .errors import ConfigurationError, InvalidInputError, ResolutionError
from .measurement import TwoLevelAbsorptive, absorptive_components

__all__ = [
    "FieldModel",
    "FieldState",
    "FieldSeries",
    "MemoryKernelReport",
    "RESOLUTION_GUARD",
    "simulate_field",
    "reduced_dynamics",
    "memory_kernel_check",
]

# maximum dt * max(W, Omega, Gamma) accepted by the integrator
RESOLUTION_GUARD = 0.1


@dataclass(frozen=True)
class FieldModel:
    omega: float
    gamma: float
    half_width: float
    n_modes: int
    dt: float

    def __post_init__(self):
        for name in ("omega", "gamma", "half_width", "dt"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidInputError(f"{name} must be finite")
        if self.gamma < 0:
            raise InvalidInputError(f"gamma must be >= 0, got {self.gamma!r}")
        if self.half_width <= 0:
            raise InvalidInputError(f"half_width must be > 0, got {self.half_width!r}")
        if int(self.n_modes) != self.n_modes or self.n_modes < 2:
            raise InvalidInputError(f"n_modes must be an integer >= 2, got {self.n_modes!r}")
        if self.dt <= 0:
            raise InvalidInputError(f"dt must be > 0, got {self.dt!r}")
        object.__setattr__(self, "n_modes", int(self.n_modes))

    @property
    def frequencies(self) -> np.ndarray:
        return np.linspace(-self.half_width, self.half_width, self.n_modes)

    @property
    def spacing(self) -> float:
        return 2 * self.half_width / (self.n_modes - 1)

    @property
    def coupling_density(self) -> float:
        return math.sqrt(self.gamma / (2 * math.pi))

    @property
    def mode_coupling(self) -> float:
        return math.sqrt(self.gamma * self.spacing / (2 * math.pi))

    def resolution_product(self) -> float:
        return self.dt * max(self.half_width, abs(self.omega), self.gamma)


@dataclass(frozen=True)
class FieldState:
    x: complex
    y: complex
    z: np.ndarray
    t: float
    spacing: float

    @property
    def norm2(self) -> float:
        return abs(self.x) ** 2 + abs(self.y) ** 2 + float(np.sum(np.abs(self.z) ** 2)) * self.spacing


@dataclass(frozen=True, eq=False)
class FieldSeries:
    """Output of :func:`simulate_field`.

    ``x`` and ``y`` are stored at every integrator step (``times``); the field
    amplitudes only at ``sample_index`` (every ``sample_every`` steps).
    """

    model: FieldModel
    times: np.ndarray
    x: np.ndarray
    y: np.ndarray
    sample_index: np.ndarray
    z_samples: np.ndarray
    norm2: np.ndarray = field(repr=False)

    @property
    def sample_times(self) -> np.ndarray:
        return self.times[self.sample_index]

    def states(self) -> Iterator[FieldState]:
        for row, i in enumerate(self.sample_index):
            yield FieldState(
                x=complex(self.x[i]),
                y=complex(self.y[i]),
                z=self.z_samples[row],
                t=float(self.times[i]),
                spacing=self.model.spacing,
            )

    def rows(self):
        """CSV rows ``t, re_x, im_x, re_y, im_y, norm2`` at the sample times."""
        for row, i in enumerate(self.sample_index):
            x, y = self.x[i], self.y[i]
            yield (float(self.times[i]), x.real, x.imag, y.real, y.imag, float(self.norm2[row]))


def _check_resolution(model: FieldModel):
    prod = model.resolution_product()
    if prod > RESOLUTION_GUARD * (1 + 1e-9):
        raise ConfigurationError(
            f"dt * max(W, Omega, Gamma) = {prod:.6g} exceeds {RESOLUTION_GUARD}; reduce dt"
        )


def simulate_field(model: FieldModel, total_time: float, sample_every: int = 100) -> FieldSeries:
    """Integrate the full field model from ``x=1, y=0, z=0`` with classical RK4.

    ``total_time`` must be a whole number of steps.  The step count is fixed,
    so identical inputs give bit-identical output.
    """
    if not (math.isfinite(total_time) and total_time > 0):
        raise InvalidInputError(f"total_time must be positive and finite, got {total_time!r}")
    if int(sample_every) != sample_every or sample_every < 1:
        raise InvalidInputError(f"sample_every must be a positive integer, got {sample_every!r}")
    _check_resolution(model)
    n_steps = int(round(total_time / model.dt))
    if n_steps < 1 or abs(n_steps * model.dt - total_time) > 1e-9 * total_time:
        raise ConfigurationError(
            f"total_time={total_time!r} is not a whole number of steps dt={model.dt!r}"
        )

    om = model.omega
    w = model.frequencies
    kappa = model.mode_coupling
    n = model.n_modes
    dt = model.dt

    def rhs(v: np.ndarray) -> np.ndarray:
        out = np.empty_like(v)
        out[0] = -1j * om * v[1]
        out[1] = -1j * (om * v[0] + kappa * v[2:].sum())
        out[2:] = -1j * (w * v[2:] + kappa * v[1])
        return out

    v = np.zeros(n + 2, dtype=complex)
    v[0] = 1.0
    xs = np.empty(n_steps + 1, dtype=complex)
    ys = np.empty(n_steps + 1, dtype=complex)
    xs[0], ys[0] = v[0], v[1]
    sample_index = list(range(0, n_steps + 1, int(sample_every)))
    if sample_index[-1] != n_steps:
        sample_index.append(n_steps)
    samples = np.empty((len(sample_index), n), dtype=complex)
    norms = np.empty(len(sample_index))
    samples[0] = v[2:]
    norms[0] = float(np.vdot(v, v).real)
    next_row = 1
    half = 0.5 * dt
    for step in range(1, n_steps + 1):
        k1 = rhs(v)
        k2 = rhs(v + half * k1)
        k3 = rhs(v + half * k2)
        k4 = rhs(v + dt * k3)
        v = v + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        xs[step], ys[step] = v[0], v[1]
        if next_row < len(sample_index) and sample_index[next_row] == step:
            samples[next_row] = v[2:]
            norms[next_row] = float(np.vdot(v, v).real)
            next_row += 1
    times = np.arange(n_steps + 1) * dt
    z_samples = samples / math.sqrt(model.spacing)
    return FieldSeries(
        model=model,
        times=times,
        x=xs,
        y=ys,
        sample_index=np.asarray(sample_index),
        z_samples=z_samples,
        norm2=norms,
    )


def reduced_dynamics(omega: float, gamma: float, t):
    """Closed-form ``(x, y)`` under ``[[0, Omega], [Omega, -i Gamma/2]]``.

    This is the absorptive two-level system with ``V = Gamma / 4``.
    """
    if not (math.isfinite(gamma) and gamma >= 0):
        raise InvalidInputError(f"gamma must be finite and >= 0, got {gamma!r}")
    return absorptive_components(TwoLevelAbsorptive(omega, gamma / 4.0), t)


@dataclass(frozen=True)
class MemoryKernelReport:
    residual: float
    per_sample: np.ndarray
    sample_times: np.ndarray


def memory_kernel_check(model: FieldModel, series: FieldSeries) -> MemoryKernelReport:
    """Rebuild every ``z_k`` from the stored ``y`` history and compare.

    Uses ``z(w, t) = -i g int_0^t exp(-i w (t - s)) y(s) ds`` with composite
    Simpson over pairs of integrator steps, so sample points must sit on even
    step indices.  The residual is in density units (same as ``z``).
    """
    if series.model != model:
        raise InvalidInputError("series was produced by a different field model")
    if len(series.times) < 3:
        raise ResolutionError("series too short for Simpson reconstruction (need >= 2 steps)")
    if np.any(series.sample_index % 2):
        raise ResolutionError("sample points must fall on even step indices for Simpson reconstruction")
    if model.dt * model.half_width > RESOLUTION_GUARD * (1 + 1e-9):
        raise ResolutionError("step too coarse to resolve the fastest mode phase in the reconstruction")

    w = model.frequencies
    g = model.coupling_density
    dt = model.dt
    t = series.times
    y = series.y
    wanted = {int(i): row for row, i in enumerate(series.sample_index)}
    per_sample = np.zeros(len(series.sample_index))
    acc = np.zeros(w.size, dtype=complex)
    phase_step = np.exp(1j * w * dt)
    phase = np.ones(w.size, dtype=complex)  # exp(i w t_j)
    for j in range(0, len(t) - 2, 2):
        p1 = phase * phase_step
        p2 = p1 * phase_step
        acc += (dt / 3.0) * (phase * y[j] + 4 * p1 * y[j + 1] + p2 * y[j + 2])
        phase = p2
        if (j + 2) in wanted:
            row = wanted[j + 2]
            z_rec = -1j * g * np.exp(-1j * w * t[j + 2]) * acc
            per_sample[row] = float(np.max(np.abs(z_rec - series.z_samples[row])))
    # row 0 is t = 0, where both sides are identically zero
    return MemoryKernelReport(
        residual=float(per_sample.max()), per_sample=per_sample, sample_times=series.sample_times
    )
