"""Best uniform approximation by a linear form on a finite sample set."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .basis import Basis, DimensionError, SampleSet, evaluate_basis
from .lp import LinearProgram, LpStatus, LpTolerances, solve

MAX_LOCATION_TOL = 1e-6


class FitError(RuntimeError):
    """LP backend failed, or returned a status the problem cannot have."""


@dataclass(frozen=True)
class PolyFit:
    basis: Basis
    coefficients: np.ndarray = field(repr=False)
    max_deviation: float
    solve_time: float = 0.0
    lp_iterations: int = 0

    def __call__(self, points: np.ndarray) -> np.ndarray:
        return self.basis.design_matrix(points) @ self.coefficients


@dataclass(frozen=True)
class Residuals:
    residuals: np.ndarray
    max_abs: float
    argmax: np.ndarray  # indices of points within MAX_LOCATION_TOL of max_abs


def _check(samples: SampleSet, basis: Basis):
    if len(basis) == 0:
        raise ValueError("empty basis")
    if samples.dimension != basis.dimension:
        raise DimensionError(
            f"samples live in R^{samples.dimension}, basis in R^{basis.dimension}"
        )


def assemble_minimax_lp(samples: SampleSet, basis: Basis) -> LinearProgram:
    """LP over ``(a_0, ..., a_n, z)`` minimising ``z``.

    Two rows per sample point, in point order, the ``f - L <= z`` row first.
    """
    _check(samples, basis)
    G = basis.design_matrix(samples.points)
    N, k = G.shape
    f = samples.values
    A = np.empty((2 * N, k + 1))
    A[0::2, :k] = -G
    A[1::2, :k] = G
    A[:, k] = -1.0
    b = np.empty(2 * N)
    b[0::2] = -f
    b[1::2] = f
    c = np.zeros(k + 1)
    c[k] = 1.0
    return LinearProgram(c, A, b)


def fit_polynomial(
    samples: SampleSet, basis: Basis, tolerances: LpTolerances | None = None
) -> PolyFit:
    t0 = time.perf_counter()
    lp = assemble_minimax_lp(samples, basis)
    sol = solve(lp, tolerances)
    elapsed = time.perf_counter() - t0
    if sol.status is LpStatus.NUMERICAL_FAILURE:
        raise FitError(f"LP solver failed: {sol.message}")
    if sol.status is not LpStatus.OPTIMAL:
        # z is free and every (A, z) with z large is feasible
        raise FitError(f"minimax LP came back {sol.status.value}; assembly bug")
    coef = sol.x[:-1].copy()
    return PolyFit(basis, coef, float(sol.x[-1]), elapsed, sol.iterations)


def evaluate_polynomial(fit: PolyFit, point) -> float:
    return float(evaluate_basis(fit.basis, point) @ fit.coefficients)


def residual_surface(fit: PolyFit, samples: SampleSet) -> Residuals:
    """``f(x_i) - L(A, x_i)`` at every sample plus where the maximum is hit."""
    _check(samples, fit.basis)
    res = samples.values - fit(samples.points)
    mag = np.abs(res)
    top = float(mag.max())
    return Residuals(res, top, np.flatnonzero(mag >= top - MAX_LOCATION_TOL))
