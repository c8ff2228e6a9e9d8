"""Self-energy of a level coupled to a continuum, and its resonance pole.

For a coupling density ``g^2(w)`` the self-energy on the first sheet is

    Sigma(E) = int dw g^2(w) / (E - w),

analytic off the support of ``g^2``.  Approaching the support from above and
below gives ``P int g^2/(x - w) dw -/+ i pi g^2(x)``, so the jump across the
cut is ``Sigma(x+i0) - Sigma(x-i0) = -2 pi i g^2(x)``.  Continuing downward
through the cut therefore lands on

    Sigma_II(E) = Sigma(E) - 2 pi i g^2(E),

where the resonance pole ``E = w0 + Sigma_II(E)`` lives.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Sequence

import numpy as np
from scipy import integrate

from .errors import (
    BoundaryError,
    DomainError,
    EndpointSingularityError,
    FirstSheetWarning,
    InvalidInputError,
    NumericFailureError,
    OutOfBandWarning,
    RegimeError,
    SolverError,
    UnsupportedContinuationError,
)
from .tolerances import DEFAULT_TOLERANCES, Tolerances

__all__ = [
    "FormFactor",
    "Sheet",
    "SelfEnergyValue",
    "PoleSolution",
    "ContinuumZenoTime",
    "self_energy",
    "self_energy_quadrature",
    "principal_value",
    "principal_value_tabulated",
    "boundary_values",
    "second_sheet",
    "sigma_derivative",
    "find_pole",
    "golden_rule",
    "zeno_time_continuum",
    "weisskopf_wigner_amplitude",
    "check_first_sheet",
]

FLAT_INTERVAL = "flat_interval"
CONSTANT_LINE = "constant_line"
TABULATED = "tabulated"
KINDS = (FLAT_INTERVAL, CONSTANT_LINE, TABULATED)


class Sheet(str, Enum):
    FIRST = "first"
    SECOND = "second"


@dataclass(frozen=True)
class FormFactor:
    """Coupling density ``g^2(w)`` between the discrete level and the continuum.

    Build instances with :meth:`flat_interval`, :meth:`constant_line` or
    :meth:`tabulated`; the tabulated kind interpolates ``g^2`` linearly and
    vanishes outside its grid.
    """

    kind: str
    g0_sq: float
    omega_g: float
    omega_max: float
    grid: tuple = ()
    g_sq_values: tuple = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidInputError(f"unknown form factor kind {self.kind!r}; expected one of {KINDS}")
        if not (math.isfinite(self.g0_sq) and self.g0_sq >= 0):
            raise InvalidInputError(f"g0_sq must be finite and >= 0, got {self.g0_sq!r}")
        if self.kind == FLAT_INTERVAL:
            if not (math.isfinite(self.omega_g) and math.isfinite(self.omega_max)):
                raise InvalidInputError("flat_interval support must be finite")
            if not self.omega_max > self.omega_g:
                raise InvalidInputError("flat_interval needs omega_max > omega_g")
        if self.kind == TABULATED:
            x = np.asarray(self.grid, dtype=float)
            y = np.asarray(self.g_sq_values, dtype=float)
            if x.ndim != 1 or x.size < 2 or x.shape != y.shape:
                raise InvalidInputError("tabulated form factor needs matching 1-D grids of length >= 2")
            if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
                raise InvalidInputError("tabulated form factor has non-finite values")
            if np.any(np.diff(x) <= 0):
                raise InvalidInputError("tabulated grid must be strictly increasing")
            if np.any(y < 0):
                raise InvalidInputError("tabulated g^2 values must be >= 0")

    @classmethod
    def flat_interval(cls, g0_sq: float, omega_g: float = 0.0, omega_max: float = 1.0) -> "FormFactor":
        return cls(FLAT_INTERVAL, float(g0_sq), float(omega_g), float(omega_max))

    @classmethod
    def constant_line(cls, gamma: float) -> "FormFactor":
        """Flat coupling ``g^2 = gamma / 2 pi`` on the whole real line."""
        if not (math.isfinite(gamma) and gamma >= 0):
            raise InvalidInputError(f"gamma must be finite and >= 0, got {gamma!r}")
        return cls(CONSTANT_LINE, gamma / (2 * math.pi), -math.inf, math.inf)

    @classmethod
    def tabulated(cls, omega: Sequence[float], g_sq: Sequence[float]) -> "FormFactor":
        x = tuple(float(v) for v in omega)
        y = tuple(float(v) for v in g_sq)
        if len(x) < 2:
            raise InvalidInputError("tabulated form factor needs at least two points")
        return cls(TABULATED, max(y) if y else 0.0, x[0], x[-1], x, y)

    @property
    def gamma_line(self) -> float:
        return 2 * math.pi * self.g0_sq

    @property
    def support(self) -> tuple[float, float]:
        return self.omega_g, self.omega_max

    @property
    def width(self) -> float:
        return self.omega_max - self.omega_g

    def inside(self, x: float, strict: bool = True) -> bool:
        if strict:
            return self.omega_g < x < self.omega_max
        return self.omega_g <= x <= self.omega_max

    def g_sq(self, x):
        """``g^2`` at real frequencies (zero outside the support)."""
        x = np.asarray(x, dtype=float)
        if self.kind == CONSTANT_LINE:
            out = np.full(x.shape, self.g0_sq)
        elif self.kind == FLAT_INTERVAL:
            out = np.where((x >= self.omega_g) & (x <= self.omega_max), self.g0_sq, 0.0)
        else:
            out = np.interp(x, self.grid, self.g_sq_values, left=0.0, right=0.0)
        return float(out) if out.ndim == 0 else out

    def g_sq_continued(self, e: complex) -> complex:
        """Analytic continuation of ``g^2`` off the real axis (constant kinds only)."""
        if self.kind == TABULATED:
            raise UnsupportedContinuationError(
                "tabulated form factors have no analytic continuation; they are first-sheet only"
            )
        return complex(self.g0_sq)

    def total_weight(self) -> float:
        """``int g^2(w) dw``; infinite for the constant line."""
        if self.kind == CONSTANT_LINE:
            return 0.0 if self.g0_sq == 0 else math.inf
        if self.kind == FLAT_INTERVAL:
            return self.g0_sq * self.width
        # exact for linear interpolation
        return float(np.trapezoid(self.g_sq_values, self.grid))

    def to_dict(self) -> dict[str, Any]:
        if self.kind == FLAT_INTERVAL:
            return {"kind": self.kind, "g0_sq": self.g0_sq, "omega_g": self.omega_g, "omega_max": self.omega_max}
        if self.kind == CONSTANT_LINE:
            return {"kind": self.kind, "gamma": self.gamma_line}
        return {"kind": self.kind, "omega": list(self.grid), "g_sq": list(self.g_sq_values)}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "FormFactor":
        if not isinstance(d, dict) or "kind" not in d:
            raise InvalidInputError("form factor must be an object with a 'kind' field")
        kind = d["kind"]
        allowed = {
            FLAT_INTERVAL: {"kind", "g0_sq", "omega_g", "omega_max"},
            CONSTANT_LINE: {"kind", "gamma"},
            TABULATED: {"kind", "omega", "g_sq"},
        }
        if kind not in allowed:
            raise InvalidInputError(f"unknown form factor kind {kind!r}")
        extra = set(d) - allowed[kind]
        missing = allowed[kind] - set(d)
        if extra:
            raise InvalidInputError(f"unknown form factor keys: {sorted(extra)}")
        if missing:
            raise InvalidInputError(f"missing form factor keys: {sorted(missing)}")
        try:
            if kind == FLAT_INTERVAL:
                return cls.flat_interval(float(d["g0_sq"]), float(d["omega_g"]), float(d["omega_max"]))
            if kind == CONSTANT_LINE:
                return cls.constant_line(float(d["gamma"]))
            return cls.tabulated(d["omega"], d["g_sq"])
        except (TypeError, ValueError) as exc:
            if isinstance(exc, InvalidInputError):
                raise
            raise InvalidInputError(f"bad form factor value: {exc}") from None


@dataclass(frozen=True)
class SelfEnergyValue:
    e: complex
    sheet: Sheet
    value: complex


def _on_support_line(ff: FormFactor, e: complex) -> bool:
    return e.imag == 0 and ff.inside(e.real, strict=False)


def _sigma_flat(ff: FormFactor, e):
    # single log: its cut is exactly [omega_g, omega_max]
    return ff.g0_sq * np.log((e - ff.omega_g) / (e - ff.omega_max))


def self_energy(
    ff: FormFactor, e: complex, sheet: Sheet | str = Sheet.FIRST, tol: Tolerances = DEFAULT_TOLERANCES
) -> SelfEnergyValue:
    """Evaluate ``Sigma(E)`` on the requested sheet."""
    sheet = Sheet(sheet)
    e = complex(e)
    if not (math.isfinite(e.real) and math.isfinite(e.imag)):
        raise InvalidInputError(f"energy must be finite, got {e!r}")
    if sheet is Sheet.SECOND:
        return SelfEnergyValue(e, sheet, second_sheet(ff, e).value)
    if _on_support_line(ff, e):
        raise BoundaryError(
            f"E={e!r} lies on the cut; use boundary_values() for the limits from above and below"
        )
    if ff.kind == FLAT_INTERVAL:
        value = complex(_sigma_flat(ff, e))
    elif ff.kind == CONSTANT_LINE:
        value = -1j * math.copysign(math.pi, e.imag) * ff.g0_sq
    else:
        value = self_energy_quadrature(ff, e, tol)
    return SelfEnergyValue(e, sheet, value)


def _quad(f, a, b, tol: Tolerances, points=None) -> float:
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, err = integrate.quad(
                f, a, b, epsabs=tol.quad_abs, epsrel=tol.quad_rel, limit=500, points=points
            )
        except integrate.IntegrationWarning as exc:
            raise NumericFailureError(f"adaptive quadrature did not converge on [{a}, {b}]: {exc}") from None
    return val


def _segments(ff: FormFactor, extra: Sequence[float] = ()) -> list[tuple[float, float]]:
    if ff.kind == TABULATED:
        nodes = list(ff.grid)
    else:
        nodes = [ff.omega_g, ff.omega_max]
    nodes = sorted(set(nodes) | {p for p in extra if ff.omega_g < p < ff.omega_max})
    return list(zip(nodes[:-1], nodes[1:]))


_NEAR_CUT = 1e-3


def self_energy_quadrature(ff: FormFactor, e: complex, tol: Tolerances = DEFAULT_TOLERANCES) -> complex:
    """First-sheet ``Sigma(E)`` by adaptive quadrature (finite support, E off the cut)."""
    e = complex(e)
    if not math.isfinite(ff.width):
        raise InvalidInputError("quadrature needs a finite support")
    if _on_support_line(ff, e):
        raise BoundaryError(f"E={e!r} lies on the cut")
    # close to the cut, subtract g^2(Re E) so the integrand stays bounded as Im E -> 0
    x = e.real
    near_cut = ff.inside(x) and abs(e.imag) < _NEAR_CUT * ff.width
    gx = ff.g_sq(x) if near_cut else 0.0
    re = im = 0.0
    for a, b in _segments(ff, extra=(x,)):
        re += _quad(lambda w: (ff.g_sq(w) - gx) * (1.0 / (e - w)).real, a, b, tol)
        im += _quad(lambda w: (ff.g_sq(w) - gx) * (1.0 / (e - w)).imag, a, b, tol)
    log_term = gx * np.log((e - ff.omega_g) / (e - ff.omega_max)) if gx else 0.0
    return complex(re, im) + complex(log_term)


def principal_value(ff: FormFactor, x: float, method: str = "auto", tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """``P int g^2(w) / (x - w) dw`` for ``x`` strictly inside the support.

    ``method="quadrature"`` forces the subtraction scheme

        int (g^2(w) - g^2(x)) / (x - w) dw + g^2(x) log((x - w_g) / (w_max - x)),

    whose integrand is bounded; ``"auto"`` uses closed forms where they exist.
    """
    x = float(x)
    if not ff.inside(x, strict=False) and ff.kind != CONSTANT_LINE:
        raise DomainError(f"x={x!r} is outside the support {ff.support}")
    if ff.kind != CONSTANT_LINE and (x == ff.omega_g or x == ff.omega_max):
        raise EndpointSingularityError(f"principal value diverges at the support endpoint x={x!r}")
    if ff.kind == CONSTANT_LINE:
        return 0.0
    if method == "auto" and ff.kind == FLAT_INTERVAL:
        return ff.g0_sq * math.log((x - ff.omega_g) / (ff.omega_max - x))
    if method == "auto" and ff.kind == TABULATED:
        return float(principal_value_tabulated(ff, x))
    if method not in ("auto", "quadrature"):
        raise InvalidInputError(f"unknown method {method!r}")
    gx = ff.g_sq(x)

    def regular(w):
        if w == x:
            return 0.0
        return (ff.g_sq(w) - gx) / (x - w)

    total = sum(_quad(regular, a, b, tol) for a, b in _segments(ff, extra=(x,)))
    return total + gx * math.log((x - ff.omega_g) / (ff.omega_max - x))


def principal_value_tabulated(ff: FormFactor, x) -> np.ndarray:
    """Exact principal value for a piecewise-linear ``g^2``, vectorized over ``x``.

    Segment ``k`` with line ``L_k`` contributes
    ``L_k(x) (log|x - n_k| - log|x - n_k+1|) - s_k h_k``; collecting terms by
    node, ``log|x - n_j|`` carries ``L_j(x) - L_j-1(x)``, which vanishes when
    ``x`` sits on the node, so interior nodes are harmless.
    """
    if ff.kind != TABULATED:
        raise InvalidInputError("closed-form tabulated principal value needs a tabulated form factor")
    n = np.asarray(ff.grid)
    y = np.asarray(ff.g_sq_values)
    s = np.diff(y) / np.diff(n)
    x = np.asarray(x, dtype=float)
    xf = x.reshape(-1, 1)
    lines = y[:-1] + s * (xf - n[:-1])  # L_k(x), shape (len(x), segments)
    zero = np.zeros((xf.shape[0], 1))
    coef = np.hstack([lines, zero]) - np.hstack([zero, lines])
    with np.errstate(divide="ignore", invalid="ignore"):
        logs = np.log(np.abs(xf - n))
        terms = np.where(coef == 0, 0.0, coef * logs)
    out = terms.sum(axis=1) - float(np.sum(s * np.diff(n)))
    return out.reshape(x.shape)


def boundary_values(
    ff: FormFactor, x: float, method: str = "auto", tol: Tolerances = DEFAULT_TOLERANCES
) -> tuple[complex, complex]:
    """``(Sigma(x + i0), Sigma(x - i0))`` on the first sheet."""
    x = float(x)
    if ff.kind != CONSTANT_LINE:
        if x == ff.omega_g or x == ff.omega_max:
            raise EndpointSingularityError(f"boundary values diverge at the support endpoint x={x!r}")
        if not ff.inside(x):
            raise DomainError(f"x={x!r} is not strictly inside the support {ff.support}")
    pv = principal_value(ff, x, method, tol)
    jump = math.pi * ff.g_sq(x)
    return complex(pv, -jump), complex(pv, jump)


def second_sheet(ff: FormFactor, e: complex) -> SelfEnergyValue:
    """``Sigma_II(E) = Sigma(E) - 2 pi i g^2(E)`` for ``Im E <= 0``.

    On the real axis inside the support the value equals ``Sigma(x + i0)``,
    which is what continuity across the cut requires.
    """
    e = complex(e)
    if e.imag > 0:
        raise DomainError(f"second sheet is reached from below: need Im E <= 0, got {e!r}")
    g2 = ff.g_sq_continued(e)
    if ff.kind == CONSTANT_LINE:
        return SelfEnergyValue(e, Sheet.SECOND, complex(-1j * math.pi * ff.g0_sq))
    if e.imag == 0:
        if ff.inside(e.real):
            upper, _ = boundary_values(ff, e.real)
            return SelfEnergyValue(e, Sheet.SECOND, upper)
        if e.real in ff.support:
            raise EndpointSingularityError(f"branch point at E={e.real!r}")
        # off the support the first sheet is continuous across the axis
        return SelfEnergyValue(e, Sheet.SECOND, complex(_sigma_flat(ff, e.real + 0j)) - 2j * math.pi * g2)
    return SelfEnergyValue(e, Sheet.SECOND, complex(_sigma_flat(ff, e)) - 2j * math.pi * g2)


def _sigma_ii(ff: FormFactor, e: complex) -> complex:
    return second_sheet(ff, e).value


def sigma_derivative(ff: FormFactor, e: complex, step: float | None = None) -> complex:
    """``Sigma_II'(E)`` by central differencing along the real direction."""
    e = complex(e)
    h = step if step is not None else 1e-6 * max(1.0, abs(e))
    return (_sigma_ii(ff, e + h) - _sigma_ii(ff, e - h)) / (2 * h)


@dataclass(frozen=True)
class PoleSolution:
    """Resonance pole ``E = w0 + d_w0 - i gamma / 2`` on the second sheet."""

    e_pole: complex
    delta_omega0: float
    gamma: float
    z: float
    residual: float
    iterations: int
    omega0: float
    sigma_prime: complex
    method: str
    form_factor: FormFactor = field(repr=False)

    def to_dict(self) -> dict[str, Any]:
        return {
            "e_pole": [self.e_pole.real, self.e_pole.imag],
            "delta_omega0": self.delta_omega0,
            "gamma": self.gamma,
            "z": self.z,
            "residual": self.residual,
            "iterations": self.iterations,
            "omega0": self.omega0,
            "sigma_prime": [self.sigma_prime.real, self.sigma_prime.imag],
            "method": self.method,
            "form_factor": self.form_factor.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "PoleSolution":
        return cls(
            e_pole=complex(*d["e_pole"]),
            delta_omega0=float(d["delta_omega0"]),
            gamma=float(d["gamma"]),
            z=float(d["z"]),
            residual=float(d["residual"]),
            iterations=int(d["iterations"]),
            omega0=float(d["omega0"]),
            sigma_prime=complex(*d["sigma_prime"]),
            method=str(d["method"]),
            form_factor=FormFactor.from_dict(d["form_factor"]),
        )


def check_first_sheet(ff: FormFactor, omega0: float) -> bool:
    """Warn when the coupling may produce first-sheet singularities.

    Compares ``|Sigma|`` just below the threshold with ``w0 - w_g``.  A flat
    interval has a logarithmic threshold divergence, so the probe sits a
    relative distance 1e-6 of the support width below ``w_g``.
    """
    if ff.kind == CONSTANT_LINE:
        return True
    probe = ff.omega_g - 1e-6 * ff.width
    sigma = self_energy(ff, complex(probe, 0.0)).value
    ok = abs(sigma) < omega0 - ff.omega_g
    if not ok:
        warnings.warn(
            f"|Sigma| near threshold ({abs(sigma):.3g}) is not below w0 - w_g ({omega0 - ff.omega_g:.3g}); "
            "first-sheet singularities may exist",
            FirstSheetWarning,
            stacklevel=3,
        )
    return ok


def find_pole(
    ff: FormFactor,
    omega0: float,
    damping: float = 0.5,
    max_iter: int = 200,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> PoleSolution:
    """Solve ``E - w0 - Sigma_II(E) = 0`` near ``w0 - i pi g^2(w0)``.

    Damped fixed-point iteration ``E <- (1-d) E + d (w0 + Sigma_II(E))`` with a
    secant fallback on the residual.
    """
    omega0 = float(omega0)
    if ff.kind == TABULATED:
        raise UnsupportedContinuationError("pole search needs the second sheet; tabulated form factors are first-sheet only")
    if not ff.inside(omega0):
        raise RegimeError(f"w0={omega0!r} is not embedded in the continuum support {ff.support}")
    check_first_sheet(ff, omega0)
    box = ff.width if math.isfinite(ff.width) else math.inf

    def f(e: complex) -> complex:
        return e - omega0 - _sigma_ii(ff, e)

    scale = max(1.0, abs(omega0))
    fine = 1e-14 * scale
    e = complex(omega0, -math.pi * ff.g_sq(omega0))
    trajectory = [e]
    res = abs(f(e))
    method = "fixed-point"
    iterations = 0
    best = (res, e)
    for iterations in range(1, max_iter + 1):
        if res <= fine:
            break
        e = (1 - damping) * e + damping * (omega0 + _sigma_ii(ff, e))
        trajectory.append(e)
        if e.imag > 0 or abs(e.imag) > box:
            break
        res = abs(f(e))
        if res < best[0]:
            best = (res, e)
    res, e = best
    if res > tol.pole_residual:
        method = "secant"
        e0, e1 = trajectory[-2] if len(trajectory) > 1 else e - 1e-3, e
        e0 = complex(e0.real, min(e0.imag, 0.0))
        e1 = complex(e1.real, min(e1.imag, 0.0))
        f0, f1 = f(e0), f(e1)
        for _ in range(100):
            iterations += 1
            if f1 == f0:
                break
            e2 = e1 - f1 * (e1 - e0) / (f1 - f0)
            e2 = complex(e2.real, min(e2.imag, 0.0))
            trajectory.append(e2)
            e0, f0, e1, f1 = e1, f1, e2, f(e2)
            if abs(f1) < res:
                res, e = abs(f1), e1
            if res <= fine:
                break
    if abs(e.imag) > box:
        raise RegimeError(f"pole escaped the search box (|Im E| = {abs(e.imag):.3g} > support width {box:.3g})")
    if res > tol.pole_residual:
        raise SolverError(f"pole search did not converge (residual {res:.3g})", residual=res, trajectory=trajectory)
    if not e.imag < 0:
        raise SolverError(f"pole found on the real axis or above it: {e!r}", residual=res, trajectory=trajectory)
    sp = sigma_derivative(ff, e)
    return PoleSolution(
        e_pole=e,
        delta_omega0=e.real - omega0,
        gamma=-2 * e.imag,
        z=abs(1 - sp) ** -2,
        residual=res,
        iterations=iterations,
        omega0=omega0,
        sigma_prime=sp,
        method=method,
        form_factor=ff,
    )


def golden_rule(ff: FormFactor, omega0: float) -> float:
    """Leading-order width ``2 pi g^2(w0)``; zero (with a warning) off the support."""
    if not ff.inside(omega0):
        warnings.warn(f"w0={omega0!r} outside the support {ff.support}: no on-shell decay channel", OutOfBandWarning, stacklevel=2)
        return 0.0
    return 2 * math.pi * ff.g_sq(omega0)


@dataclass(frozen=True)
class ContinuumZenoTime:
    tau_z: float
    divergent: bool


def zeno_time_continuum(ff: FormFactor) -> ContinuumZenoTime:
    """``tau_Z = (int g^2 dw)^(-1/2)``.

    A non-integrable coupling (the constant line) has no quadratic region:
    the result is ``tau_z = 0`` with ``divergent=True``.
    """
    weight = ff.total_weight()
    if math.isinf(weight):
        return ContinuumZenoTime(0.0, True)
    if weight == 0:
        return ContinuumZenoTime(math.inf, False)
    return ContinuumZenoTime(weight**-0.5, False)


def weisskopf_wigner_amplitude(pole: PoleSolution, t):
    """Purely exponential amplitude ``exp(-i E_pole t)``."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise InvalidInputError("Weisskopf-Wigner amplitude is defined for t >= 0")
    out = np.exp(-1j * pole.e_pole * t_arr)
    return complex(out) if out.ndim == 0 else out
