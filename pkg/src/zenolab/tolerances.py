"""Numerical tolerances used as defaults throughout the package.

Functions that depend on a tolerance take an optional ``tol`` argument; pass
``DEFAULT_TOLERANCES.replace(...)`` to override individual entries.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    hermitian: float = 1e-12        # relative to max |entry|
    unit_norm: float = 1e-12        # |norm^2 - 1| for initial states
    expm_residual: float = 1e-13    # Taylor tail, relative to the partial sum
    expm_max_terms: int = 60
    variance_zero: float = 1e-12    # relative to max(1, <H^2>)
    survival_zero: float = 1e-14    # |A| at or below this is a survival zero
    pole_residual: float = 1e-10
    normalization: float = 1e-3    # spectral density mass must be 1 within this
    quad_abs: float = 1e-13
    quad_rel: float = 1e-12

    def replace(self, **changes) -> "Tolerances":
        return dataclasses.replace(self, **changes)


DEFAULT_TOLERANCES = Tolerances()
