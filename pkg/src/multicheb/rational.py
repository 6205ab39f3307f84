"""Best uniform generalised rational approximation by bisection.

The uniform error of ``P/Q`` is quasiconvex in the coefficients, so its
sublevel sets are convex and the optimal level can be bracketed by
testing feasibility of ``|f - P/Q| <= z`` at the midpoint of ``[l, u]``.
On a finite grid each test is one LP (the default) or a halfspace
projection run (experimental, see :mod:`multicheb.projection`).
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .basis import Basis, DimensionError, SampleSet, evaluate_basis
from .lp import LinearProgram, LpStatus, LpTolerances, solve

log = logging.getLogger(__name__)

FEASIBLE_UTILDE = 1e-9
MAX_DOUBLINGS = 60


class ConfigurationError(ValueError):
    pass


class FeasibilityError(RuntimeError):
    """The feasibility oracle failed at a given level ``z``."""

    def __init__(self, z: float, message: str):
        super().__init__(f"feasibility check at z={z!r} failed: {message}")
        self.z = z


class EvaluationError(ValueError):
    pass


@dataclass(frozen=True)
class RationalModel:
    num_basis: Basis
    den_basis: Basis
    A: np.ndarray = field(repr=False)
    B: np.ndarray = field(repr=False)
    delta: float = 1e-6

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float).reshape(-1)
        B = np.asarray(self.B, dtype=float).reshape(-1)
        if A.shape[0] != len(self.num_basis) or B.shape[0] != len(self.den_basis):
            raise ValueError("coefficient vectors do not match the bases")
        if self.num_basis.dimension != self.den_basis.dimension:
            raise DimensionError("numerator and denominator bases differ in dimension")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)

    def numerator(self, points) -> np.ndarray:
        return self.num_basis.design_matrix(points) @ self.A

    def denominator(self, points) -> np.ndarray:
        return self.den_basis.design_matrix(points) @ self.B

    def __call__(self, points) -> np.ndarray:
        """Vectorised evaluation; raises if a denominator drops below ``delta / 2``."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        q = self.denominator(points)
        low = np.flatnonzero(q < self.delta / 2)
        if low.size:
            i = low[0]
            raise EvaluationError(
                f"denominator {q[i]:.3g} below guard {self.delta / 2:.3g} "
                f"at point {points[i].tolist()}"
            )
        return self.numerator(points) / q


def evaluate_rational(model: RationalModel, point) -> float:
    x = np.asarray(point, dtype=float).reshape(-1)
    q = float(evaluate_basis(model.den_basis, x) @ model.B)
    if q < model.delta / 2:
        raise EvaluationError(
            f"denominator {q:.3g} below guard {model.delta / 2:.3g} at point {x.tolist()}"
        )
    return float(evaluate_basis(model.num_basis, x) @ model.A) / q


@dataclass(frozen=True)
class BisectionConfig:
    epsilon: float = 1e-4
    delta: float = 1e-6
    max_iterations: int = 200
    coefficient_bound: float = 1e6
    feasibility_backend: str = "lp"
    pin_index: int | None = None  # denominator coefficient fixed to 1; None: the constant
    bracket: tuple[float, float] | None = None
    lp_tolerances: LpTolerances = field(default_factory=LpTolerances)

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ConfigurationError("epsilon must be positive")
        if not self.delta > 0:
            raise ConfigurationError("delta must be positive")
        if not self.coefficient_bound > max(1.0, self.delta):
            raise ConfigurationError("coefficient bound must exceed max(1, delta)")
        if self.max_iterations < 1:
            raise ConfigurationError("max_iterations must be positive")
        if self.feasibility_backend not in ("lp", "projection"):
            raise ConfigurationError(
                f"unknown feasibility backend {self.feasibility_backend!r}"
            )
        if self.bracket is not None:
            lo, hi = self.bracket
            if not 0 <= lo <= hi:
                raise ConfigurationError("bracket must satisfy 0 <= l <= u")


@dataclass(frozen=True)
class FeasibilityVerdict:
    feasible: bool
    witness: tuple[np.ndarray, np.ndarray] | None = None
    u_tilde: float | None = None
    backend: str = "lp"
    low_confidence: bool = False
    max_violation: float | None = None


@dataclass(frozen=True)
class TraceEntry:
    z: float
    feasible: bool
    lower: float  # bracket after this step
    upper: float
    u_tilde: float | None = None
    backend: str = "lp"


@dataclass(frozen=True)
class RationalFit:
    model: RationalModel
    max_deviation: float
    bracket: tuple[float, float]
    iterations: int
    trace: tuple[TraceEntry, ...]
    solve_time: float
    converged: bool
    initial_bracket: tuple[float, float]


def _pin(den_basis: Basis, config: BisectionConfig) -> int:
    if config.pin_index is not None:
        if not 0 <= config.pin_index < len(den_basis):
            raise ConfigurationError(f"pin index {config.pin_index} outside denominator basis")
        return config.pin_index
    k = den_basis.constant_index()
    if k is None:
        raise ConfigurationError(
            "denominator basis has no constant function; name the coefficient "
            "to fix at 1 with pin_index"
        )
    return k


@dataclass(frozen=True)
class _Problem:
    """Design matrices and bookkeeping reused across bisection steps."""

    f: np.ndarray
    G: np.ndarray  # numerator basis at samples (N, n+1)
    H: np.ndarray  # denominator basis at samples (N, m+1)
    pin: int

    @property
    def h_pin(self) -> np.ndarray:
        return self.H[:, self.pin]

    @property
    def H_free(self) -> np.ndarray:
        return np.delete(self.H, self.pin, axis=1)

    def split(self, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Joint vector ``(A, B without pin)`` -> ``(A, B)`` with ``B[pin] = 1``."""
        k = self.G.shape[1]
        A = v[:k].copy()
        B = np.insert(v[k:], self.pin, 1.0)
        return A, B


def _problem(samples: SampleSet, num_basis: Basis, den_basis: Basis, pin: int) -> _Problem:
    for basis in (num_basis, den_basis):
        if basis.dimension != samples.dimension:
            raise DimensionError(
                f"samples live in R^{samples.dimension}, basis in R^{basis.dimension}"
            )
    G = num_basis.design_matrix(samples.points)
    H = den_basis.design_matrix(samples.points)
    return _Problem(samples.values, G, H, pin)


def assemble_feasibility_lp(
    samples: SampleSet,
    num_basis: Basis,
    den_basis: Basis,
    z: float,
    delta: float,
    M: float,
    pin_index: int | None = None,
) -> LinearProgram:
    """Auxiliary LP ``min u~`` whose optimum is ``<= 0`` iff level ``z`` is reachable.

    Variables are ``A``, ``B`` minus its pinned entry, then ``u~``. Per
    point, in order::

        f Q - P <= z Q + u~
        P - f Q <= z Q + u~
        -Q      <= -delta

    with ``Q = B.H(x)`` and the pinned term moved to the right-hand side.
    ``A`` and the free part of ``B`` are boxed by ``|.| <= M``.
    """
    if z < 0:
        raise ValueError("z must be non-negative")
    if not delta > 0:
        raise ValueError("delta must be positive")
    pin = _pin(den_basis, BisectionConfig(delta=delta, coefficient_bound=M, pin_index=pin_index))
    return _feasibility_lp(_problem(samples, num_basis, den_basis, pin), z, delta, M)


def _feasibility_lp(prob: _Problem, z: float, delta: float, M: float) -> LinearProgram:
    f, G, Hf, hp = prob.f, prob.G, prob.H_free, prob.h_pin
    N, k = G.shape
    mf = Hf.shape[1]
    d = k + mf + 1
    A = np.zeros((3 * N, d))
    b = np.empty(3 * N)
    # f Q - P - z Q - u <= 0  ->  -P + (f - z) Qfree - u <= -(f - z) h_pin
    A[0::3, :k] = -G
    A[0::3, k : k + mf] = (f - z)[:, None] * Hf
    A[0::3, -1] = -1.0
    b[0::3] = -(f - z) * hp
    # P - f Q - z Q - u <= 0  ->  P - (f + z) Qfree - u <= (f + z) h_pin
    A[1::3, :k] = G
    A[1::3, k : k + mf] = -(f + z)[:, None] * Hf
    A[1::3, -1] = -1.0
    b[1::3] = (f + z) * hp
    # -Qfree <= h_pin - delta
    A[2::3, k : k + mf] = -Hf
    b[2::3] = hp - delta
    c = np.zeros(d)
    c[-1] = 1.0
    lower = np.full(d, -M)
    upper = np.full(d, M)
    lower[-1], upper[-1] = -np.inf, np.inf
    return LinearProgram(c, A, b, lower, upper)


def _lp_verdict(prob: _Problem, z: float, config: BisectionConfig) -> FeasibilityVerdict:
    lp = _feasibility_lp(prob, z, config.delta, config.coefficient_bound)
    sol = solve(lp, config.lp_tolerances)
    if sol.status is LpStatus.UNBOUNDED:
        # u~ -> -inf: strictly feasible; any feasible point of the LP is a witness
        return FeasibilityVerdict(True, prob.split(sol.x[:-1]), -math.inf)
    if sol.status is not LpStatus.OPTIMAL:
        raise FeasibilityError(z, f"LP status {sol.status.value}: {sol.message}")
    u = float(sol.objective_value)
    if u <= FEASIBLE_UTILDE:
        return FeasibilityVerdict(True, prob.split(sol.x[:-1]), u)
    return FeasibilityVerdict(False, None, u)


def check_feasibility(
    samples: SampleSet,
    num_basis: Basis,
    den_basis: Basis,
    z: float,
    config: BisectionConfig | None = None,
) -> FeasibilityVerdict:
    """Is there ``(A, B)`` with ``|f - P/Q| <= z`` and ``Q >= delta`` on every sample?"""
    config = config or BisectionConfig()
    prob = _problem(samples, num_basis, den_basis, _pin(den_basis, config))
    return _verdict(prob, z, config)


def _verdict(prob: _Problem, z: float, config: BisectionConfig) -> FeasibilityVerdict:
    if config.feasibility_backend == "projection":
        from .projection import projection_verdict

        verdict = projection_verdict(prob, z, config.delta)
        if not verdict.low_confidence:
            return verdict
        log.info("projection verdict at z=%g is low-confidence; using the LP", z)
    return _lp_verdict(prob, z, config)


def _constant_witness(prob: _Problem, num_basis: Basis, level: float):
    """``P = level`` (via the numerator constant), ``Q = h_pin``; None if unusable."""
    k = num_basis.constant_index()
    if k is None:
        return None
    A = np.zeros(prob.G.shape[1])
    # a constant basis function need not be identically one
    c0 = float(prob.G[0, k])
    q0 = float(prob.H[0, prob.pin])
    if c0 == 0.0:
        return None
    A[k] = level * q0 / c0
    B = np.zeros(prob.H.shape[1])
    B[prob.pin] = 1.0
    return A, B


def _max_error(prob: _Problem, A: np.ndarray, B: np.ndarray) -> float:
    q = prob.H @ B
    return float(np.max(np.abs(prob.f - (prob.G @ A) / q)))


def initial_bracket(
    samples: SampleSet,
    num_basis: Basis,
    den_basis: Basis,
    config: BisectionConfig | None = None,
) -> tuple[float, float]:
    """Starting ``(l, u)`` for the bisection; see :func:`fit_rational`."""
    config = config or BisectionConfig()
    prob = _problem(samples, num_basis, den_basis, _pin(den_basis, config))
    lo, hi, _ = _initial_bracket(prob, num_basis, den_basis, config)
    return lo, hi


def _initial_bracket(prob: _Problem, num_basis: Basis, den_basis: Basis, config):
    f = prob.f
    if config.bracket is not None:
        lo, hi = map(float, config.bracket)
        witness = None
    else:
        has_const = num_basis.constant_index() is not None or den_basis.constant_index() is not None
        if not has_const:
            raise ConfigurationError(
                "neither basis contains a constant function; supply an explicit bracket"
            )
        lo, hi = 0.0, float(f.max() - f.min()) / 2
        witness = _constant_witness(prob, num_basis, float(f.max() + f.min()) / 2)
        if witness is not None and den_basis.constant_index() == prob.pin:
            if _max_error(prob, *witness) <= hi + 1e-12 * (1 + abs(hi)):
                return lo, hi, witness
    # verify the upper end with the oracle, widening as needed
    if hi <= 0:
        hi = config.epsilon
    for _ in range(MAX_DOUBLINGS + 1):
        v = _verdict(prob, hi, config)
        if v.feasible:
            return lo, hi, v.witness
        lo, hi = hi, 2 * hi
    raise FeasibilityError(hi / 2, f"no feasible level found after {MAX_DOUBLINGS} doublings")


def fit_rational(
    samples: SampleSet,
    num_basis: Basis,
    den_basis: Basis,
    config: BisectionConfig | None = None,
) -> RationalFit:
    """Bisection on the level ``z``.

    Starts from ``l = 0``, ``u = (max f - min f) / 2`` (witnessed by the
    constant midrange approximation), halves ``[l, u]`` while
    ``u - l >= epsilon``, and returns the witness from the last feasible
    step. ``max_deviation`` is the final ``u``.
    """
    config = config or BisectionConfig()
    t0 = time.perf_counter()
    prob = _problem(samples, num_basis, den_basis, _pin(den_basis, config))
    lo, hi, incumbent = _initial_bracket(prob, num_basis, den_basis, config)
    start = (lo, hi)
    trace: list[TraceEntry] = []
    converged = True
    while hi - lo >= config.epsilon:
        if len(trace) >= config.max_iterations:
            converged = False
            log.warning("bisection stopped at the iteration cap, bracket [%g, %g]", lo, hi)
            break
        z = 0.5 * (lo + hi)
        v = _verdict(prob, z, config)
        if v.feasible:
            hi = z
            incumbent = v.witness
        else:
            lo = z
        trace.append(TraceEntry(z, v.feasible, lo, hi, v.u_tilde, v.backend))
        log.debug("z=%.10g feasible=%s u~=%s", z, v.feasible, v.u_tilde)
    A, B = incumbent
    model = RationalModel(num_basis, den_basis, A, B, config.delta)
    return RationalFit(
        model=model,
        max_deviation=hi,
        bracket=(lo, hi),
        iterations=len(trace),
        trace=tuple(trace),
        solve_time=time.perf_counter() - t0,
        converged=converged,
        initial_bracket=start,
    )
