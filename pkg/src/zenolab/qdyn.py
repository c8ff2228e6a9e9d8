"""Finite-dimensional dynamics: propagators, survival amplitudes, moments.

Units have hbar = 1, so Hamiltonian entries are energies and also inverse
times.  All arithmetic is complex even when inputs look real.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ContractViolationError, InvalidInputError, NumericFailureError
from .tolerances import DEFAULT_TOLERANCES, Tolerances

__all__ = [
    "StateVector",
    "OperatorMatrix",
    "MomentReport",
    "ShortTimeTable",
    "PLUS",
    "MINUS",
    "pauli",
    "expm_taylor",
    "propagator",
    "evolve",
    "survival_amplitude",
    "survival_probability",
    "survival_series",
    "moments",
    "short_time_check",
]


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class StateVector:
    """Complex amplitude vector; may be sub-normalized after lossy evolution."""

    components: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.components, dtype=complex)
        if c.ndim != 1 or c.size < 1:
            raise InvalidInputError("state vector must be a non-empty 1-D array")
        if not np.all(np.isfinite(c)):
            raise InvalidInputError("state vector has non-finite components")
        object.__setattr__(self, "components", _frozen(c))

    @classmethod
    def basis(cls, dim: int, index: int) -> "StateVector":
        if not 0 <= index < dim:
            raise InvalidInputError(f"basis index {index} outside dimension {dim}")
        c = np.zeros(dim, dtype=complex)
        c[index] = 1.0
        return cls(c)

    @classmethod
    def normalized(cls, components: Sequence[complex]) -> "StateVector":
        c = np.asarray(components, dtype=complex)
        n = np.linalg.norm(c)
        if n == 0 or not np.isfinite(n):
            raise InvalidInputError("cannot normalize a zero or non-finite vector")
        return cls(c / n)

    @property
    def dim(self) -> int:
        return self.components.size

    @property
    def norm2(self) -> float:
        return float(np.vdot(self.components, self.components).real)

    def is_normalized(self, tol: Tolerances = DEFAULT_TOLERANCES) -> bool:
        return abs(self.norm2 - 1.0) <= tol.unit_norm

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.components, dtype=dtype)


PLUS = StateVector.basis(2, 0)
MINUS = StateVector.basis(2, 1)


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """Dense square complex matrix with a declared Hermiticity flag.

    The flag is checked on construction: declaring a non-Hermitian matrix
    Hermitian raises.  ``hermitian=None`` detects it.
    """

    entries: np.ndarray
    hermitian: bool | None = None

    def __post_init__(self):
        a = np.asarray(self.entries, dtype=complex)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise InvalidInputError(f"operator must be a non-empty square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise InvalidInputError("operator has non-finite entries")
        is_herm = _is_hermitian(a, DEFAULT_TOLERANCES)
        if self.hermitian is None:
            object.__setattr__(self, "hermitian", is_herm)
        elif self.hermitian and not is_herm:
            raise InvalidInputError("matrix declared hermitian but is not")
        else:
            object.__setattr__(self, "hermitian", bool(self.hermitian))
        object.__setattr__(self, "entries", _frozen(a))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def with_optical_potential(self, v: float) -> "OperatorMatrix":
        """Return ``H - i v 1``, a uniformly absorbing copy of this operator."""
        return OperatorMatrix(self.entries - 1j * v * np.eye(self.dim), hermitian=(v == 0 and self.hermitian))

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)


def _is_hermitian(a: np.ndarray, tol: Tolerances) -> bool:
    scale = np.max(np.abs(a)) if a.size else 0.0
    if scale == 0:
        return True
    return float(np.max(np.abs(a - a.conj().T))) <= tol.hermitian * scale


def pauli(j: int, omega: float = 1.0) -> OperatorMatrix:
    """``omega * sigma_j`` for j in 1, 2, 3, in the basis (|+>, |->)."""
    mats = {
        1: [[0, 1], [1, 0]],
        2: [[0, -1j], [1j, 0]],
        3: [[1, 0], [0, -1]],
    }
    if j not in mats:
        raise InvalidInputError(f"Pauli index must be 1, 2 or 3, got {j}")
    return OperatorMatrix(omega * np.array(mats[j], dtype=complex), hermitian=np.isreal(omega))


def expm_taylor(a: np.ndarray, tol: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    """Matrix exponential by scaling and squaring of a truncated Taylor series.

    The argument is scaled by ``2**-s`` until its 1-norm is at most 1/2; the
    series is summed until a term falls below ``tol.expm_residual`` relative
    to the partial sum, then squared back ``s`` times.
    """
    a = np.asarray(a, dtype=complex)
    if not np.all(np.isfinite(a)):
        raise InvalidInputError("matrix exponential of non-finite matrix")
    n = a.shape[0]
    norm = np.linalg.norm(a, 1)
    s = max(0, int(math.ceil(math.log2(norm / 0.5)))) if norm > 0.5 else 0
    b = a / (2.0**s)
    result = np.eye(n, dtype=complex)
    term = np.eye(n, dtype=complex)
    residual = math.inf
    for k in range(1, tol.expm_max_terms + 1):
        term = term @ b / k
        result = result + term
        residual = np.linalg.norm(term, 1) / max(np.linalg.norm(result, 1), 1e-300)
        if residual <= tol.expm_residual:
            break
    else:
        raise NumericFailureError(
            f"Taylor series did not converge in {tol.expm_max_terms} terms", residual=residual
        )
    for _ in range(s):
        result = result @ result
    return result


def propagator(h: OperatorMatrix, t: float, tol: Tolerances = DEFAULT_TOLERANCES) -> OperatorMatrix:
    """Return ``exp(-i H t)``.

    Hermitian generators use an eigendecomposition; anything else goes
    through :func:`expm_taylor`.
    """
    if not np.isfinite(t):
        raise InvalidInputError(f"time must be finite, got {t}")
    if t == 0:
        return OperatorMatrix(np.eye(h.dim, dtype=complex), hermitian=True)
    if h.hermitian:
        w, v = np.linalg.eigh(h.entries)
        u = (v * np.exp(-1j * w * t)) @ v.conj().T
    else:
        u = expm_taylor(-1j * t * h.entries, tol)
    return OperatorMatrix(u, hermitian=False)


def _check_pair(h: OperatorMatrix, psi0: StateVector, tol: Tolerances, need_unit: bool = True):
    if h.dim != psi0.dim:
        raise InvalidInputError(f"dimension mismatch: operator {h.dim}, state {psi0.dim}")
    if need_unit and not psi0.is_normalized(tol):
        raise InvalidInputError(f"initial state must be unit-norm (norm^2 = {psi0.norm2!r})")


def evolve(h: OperatorMatrix, psi: StateVector, t: float, tol: Tolerances = DEFAULT_TOLERANCES) -> StateVector:
    _check_pair(h, psi, tol, need_unit=False)
    return StateVector(propagator(h, t, tol).entries @ psi.components)


def survival_amplitude(
    h: OperatorMatrix, psi0: StateVector, t: float, tol: Tolerances = DEFAULT_TOLERANCES
) -> complex:
    """``<psi0| exp(-iHt) |psi0>``."""
    _check_pair(h, psi0, tol)
    u = propagator(h, t, tol).entries
    return complex(np.vdot(psi0.components, u @ psi0.components))


def survival_probability(
    h: OperatorMatrix, psi0: StateVector, t: float, tol: Tolerances = DEFAULT_TOLERANCES
) -> float:
    return abs(survival_amplitude(h, psi0, t, tol)) ** 2


def survival_series(
    h: OperatorMatrix, psi0: StateVector, times, tol: Tolerances = DEFAULT_TOLERANCES
) -> tuple[np.ndarray, np.ndarray]:
    """Amplitude and probability on a whole time grid.

    For Hermitian ``H`` a single eigendecomposition serves every time:
    ``A(t) = sum_k |<v_k|psi0>|^2 exp(-i w_k t)``.
    """
    _check_pair(h, psi0, tol)
    times = np.asarray(times, dtype=float)
    if not np.all(np.isfinite(times)):
        raise InvalidInputError("time grid has non-finite entries")
    if h.hermitian:
        w, v = np.linalg.eigh(h.entries)
        weights = np.abs(v.conj().T @ psi0.components) ** 2
        amp = np.exp(-1j * np.outer(times, w)) @ weights
        amp[times == 0] = 1.0
    else:
        amp = np.array([survival_amplitude(h, psi0, t, tol) for t in times], dtype=complex)
    return amp, np.abs(amp) ** 2


@dataclass(frozen=True)
class MomentReport:
    mean: complex
    second_moment: complex
    variance: complex
    zeno_time: float


def moments(h: OperatorMatrix, psi0: StateVector, tol: Tolerances = DEFAULT_TOLERANCES) -> MomentReport:
    """First two energy moments in ``psi0`` and the Zeno time ``variance**-1/2``.

    A vanishing variance (an eigenstate) gives ``zeno_time = inf``.  For a
    non-Hermitian generator the variance is complex; the Zeno time is then
    reported as ``nan`` unless the variance is real and positive.
    """
    _check_pair(h, psi0, tol)
    hpsi = h.entries @ psi0.components
    mean = complex(np.vdot(psi0.components, hpsi))
    second = complex(np.vdot(psi0.components, h.entries @ hpsi))
    variance = second - mean * mean
    scale = max(1.0, abs(second))
    if abs(variance) <= tol.variance_zero * scale:
        zeno = math.inf
    elif abs(variance.imag) <= tol.variance_zero * scale and variance.real > 0:
        zeno = 1.0 / math.sqrt(variance.real)
    else:
        zeno = math.nan
    return MomentReport(mean=mean, second_moment=second, variance=variance, zeno_time=zeno)


@dataclass(frozen=True)
class ShortTimeTable:
    """Short-time survival compared against ``1 - dt^2 / tau_Z^2``.

    ``quartic_coefficient`` is the least-squares ``C`` in
    ``residual ~ C dt^4``.
    """

    delta_ts: np.ndarray
    one_minus_p: np.ndarray
    quadratic_law: np.ndarray
    residuals: np.ndarray
    quartic_coefficient: float
    zeno_time: float

    def rows(self):
        return list(zip(self.delta_ts.tolist(), self.one_minus_p.tolist(), self.quadratic_law.tolist()))


def short_time_check(
    h: OperatorMatrix, psi0: StateVector, delta_ts, tol: Tolerances = DEFAULT_TOLERANCES
) -> ShortTimeTable:
    if not h.hermitian:
        raise ContractViolationError("the quadratic short-time law needs a Hermitian Hamiltonian")
    dts = np.asarray(delta_ts, dtype=float)
    if np.any(dts < 0) or not np.all(np.isfinite(dts)):
        raise InvalidInputError("short-time offsets must be finite and non-negative")
    report = moments(h, psi0, tol)
    _, p = survival_series(h, psi0, dts, tol)
    one_minus_p = 1.0 - p
    quad = dts**2 * report.variance.real
    resid = np.abs(one_minus_p - quad)
    x4 = dts**4
    denom = float(np.sum(x4 * x4))
    c = float(np.sum(resid * x4) / denom) if denom > 0 else 0.0
    return ShortTimeTable(dts, one_minus_p, quad, resid, c, report.zeno_time)
