"""Independent reference computations used to cross-check the fast paths.

Each oracle takes a different route to the same number: dense
diagonalization of a discretized continuum instead of spectral inversion,
a brute-force grid search instead of the pole iteration, step-by-step
projection instead of ``p(t/N)**N``.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import InvalidInputError, ZenoLabError
from .qdyn import OperatorMatrix, StateVector, evolve
from .resolvent import FormFactor, _sigma_ii

__all__ = [
    "discretized_hamiltonian",
    "BruteForceSurvival",
    "grid_minimize_pole",
    "repeated_projection_survival",
    "richardson_second_derivative",
]


def discretized_hamiltonian(ff: FormFactor, omega0: float, n_modes: int) -> np.ndarray:
    """Level ``omega0`` coupled to ``n_modes`` midpoint-sampled continuum states.

    Mode ``j`` sits at the centre of its cell of width ``dw`` and couples with
    ``sqrt(g^2(w_j) dw)``.  The discrete level is basis state 0.
    """
    if not math.isfinite(ff.width):
        raise InvalidInputError("discretization needs a finite support")
    if int(n_modes) != n_modes or n_modes < 2:
        raise InvalidInputError(f"n_modes must be an integer >= 2, got {n_modes!r}")
    n = int(n_modes)
    dw = ff.width / n
    w = ff.omega_g + (np.arange(n) + 0.5) * dw
    g = np.sqrt(np.asarray(ff.g_sq(w), dtype=float) * dw)
    h = np.zeros((n + 1, n + 1))
    h[0, 0] = omega0
    h[0, 1:] = g
    h[1:, 0] = g
    h[np.arange(1, n + 1), np.arange(1, n + 1)] = w
    return h


class BruteForceSurvival:
    """Survival amplitude of the discrete level from one dense ``eigh``.

    Accurate while ``t`` is well below the recurrence time ``2 pi / dw``.
    """

    def __init__(self, ff: FormFactor, omega0: float, n_modes: int):
        self.form_factor = ff
        self.omega0 = float(omega0)
        self.n_modes = int(n_modes)
        evals, evecs = np.linalg.eigh(discretized_hamiltonian(ff, omega0, n_modes))
        self.energies = evals
        self.weights = np.abs(evecs[0]) ** 2

    @property
    def recurrence_time(self) -> float:
        return 2 * math.pi * self.n_modes / self.form_factor.width

    def amplitude(self, times) -> np.ndarray:
        t = np.asarray(times, dtype=float)
        flat = t.ravel()
        out = np.empty(flat.size, dtype=complex)
        chunk = max(1, (1 << 21) // self.energies.size)
        for s in range(0, flat.size, chunk):
            out[s : s + chunk] = np.exp(-1j * np.outer(flat[s : s + chunk], self.energies)) @ self.weights
        return out.reshape(t.shape)

    def probability(self, times) -> np.ndarray:
        return np.abs(self.amplitude(times)) ** 2


def grid_minimize_pole(
    ff: FormFactor, omega0: float, guess: complex, half_box: float, n: int = 81, zooms: int = 12
) -> complex:
    """Minimize ``|E - w0 - Sigma_II(E)|`` on successively zoomed grids.

    ``guess`` seeds the box centre.  The box is clipped to the lower half
    plane and shrunk by 4 each round.
    """
    centre = complex(guess)
    half = float(half_box)
    for _ in range(zooms):
        re = np.linspace(centre.real - half, centre.real + half, n)
        im = np.linspace(centre.imag - half, min(centre.imag + half, -1e-15), n)
        best, best_val = centre, math.inf
        for y in im:
            for x in re:
                e = complex(x, y)
                try:
                    val = abs(e - omega0 - _sigma_ii(ff, e))
                except ZenoLabError:
                    continue
                if val < best_val:
                    best, best_val = e, val
        centre = best
        half /= 4
    return centre


def repeated_projection_survival(h: OperatorMatrix, psi0: StateVector, t: float, n: int) -> float:
    """Evolve for ``t/n``, project onto ``psi0``, renormalize by bookkeeping; repeat."""
    if n < 1:
        raise InvalidInputError("need at least one projection")
    tau = t / n
    p_total = 1.0
    for _ in range(n):
        psi = evolve(h, psi0, tau)
        amp = np.vdot(psi0.components, psi.components)
        p_total *= abs(amp) ** 2
    return p_total


def richardson_second_derivative(f, x: float, h: float) -> float:
    """Second derivative of ``f`` at ``x`` by one Richardson step on central differences."""

    def d2(step):
        return (f(x + step) - 2 * f(x) + f(x - step)) / step**2

    return (4 * d2(h / 2) - d2(h)) / 3

