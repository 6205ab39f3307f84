"""Experimental feasibility backend: successive halfspace projections.

For a fixed level ``z`` on a finite grid, the sets ``C+(z)`` (``f - P/Q <= z``)
and ``C-(z)`` (``P/Q - f <= z``), each with ``Q >= delta``, are finite
intersections of halfspaces in the joint coefficient space ``(A, B)`` with
the pinned denominator entry removed. Their intersection is searched by
cyclic or simultaneous (averaged) projections.

Emptiness is only detected heuristically: the iterate stops moving while
some halfspace is still violated. Verdicts close to the optimal level are
flagged ``low_confidence`` so the bisection driver can defer to the LP.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .basis import Basis, SampleSet

FEASIBILITY_TOL = 1e-8


@dataclass(frozen=True)
class Halfspace:
    """``{x : normal . x <= offset}``."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        a = np.asarray(self.normal, dtype=float).reshape(-1)
        if not np.linalg.norm(a) > 0:
            raise ValueError("halfspace normal must be non-zero")
        object.__setattr__(self, "normal", a)
        object.__setattr__(self, "offset", float(self.offset))


@dataclass(frozen=True)
class HalfspaceSystem:
    """Stacked halfspaces, stored with unit normals.

    Rescaling a halfspace does not change it or its projection, and unit
    normals make every violation a Euclidean distance.
    """

    normals: np.ndarray = field(repr=False)
    offsets: np.ndarray = field(repr=False)

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.normals, dtype=float))
        b = np.asarray(self.offsets, dtype=float).reshape(-1)
        if A.shape[0] == 0:
            raise ValueError("halfspace system must not be empty")
        if A.shape[0] != b.shape[0]:
            raise ValueError("one offset per normal")
        norms = np.linalg.norm(A, axis=1)
        if np.any(norms == 0):
            raise ValueError("halfspace normal must be non-zero")
        A = np.ascontiguousarray(A / norms[:, None])
        b = np.ascontiguousarray(b / norms)
        object.__setattr__(self, "normals", A)
        object.__setattr__(self, "offsets", b)

    @classmethod
    def from_halfspaces(cls, halfspaces) -> "HalfspaceSystem":
        hs = list(halfspaces)
        if not hs:
            raise ValueError("halfspace system must not be empty")
        return cls(np.stack([h.normal for h in hs]), np.array([h.offset for h in hs]))

    def __len__(self) -> int:
        return self.normals.shape[0]

    @property
    def dimension(self) -> int:
        return self.normals.shape[1]

    def halfspaces(self) -> list[Halfspace]:
        return [Halfspace(a, b) for a, b in zip(self.normals, self.offsets)]

    def violation(self, x) -> float:
        """Largest signed distance outside any halfspace (``<= 0`` if inside all)."""
        return float(kernels.max_violation(self.normals, self.offsets, np.asarray(x, float)))

    def __add__(self, other: "HalfspaceSystem") -> "HalfspaceSystem":
        if other.dimension != self.dimension:
            raise ValueError("cannot join systems of different dimension")
        return HalfspaceSystem(
            np.vstack([self.normals, other.normals]),
            np.concatenate([self.offsets, other.offsets]),
        )


@dataclass(frozen=True)
class ProjectionConfig:
    max_iterations: int | None = None  # sweeps; None -> 10 * number of halfspaces
    stall_tolerance: float = 1e-12
    scheme: str = "cyclic"
    relaxation: float = 1.9
    # rescale coordinates so every column of the stacked normals has unit norm
    precondition: bool = True
    # infeasible verdicts whose final violation is this small are not trusted
    low_confidence_violation: float = 1e-6

    def __post_init__(self):
        if self.scheme not in ("cyclic", "simultaneous"):
            raise ValueError(f"unknown projection scheme {self.scheme!r}")
        if self.max_iterations is not None and self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")
        if not self.stall_tolerance > 0:
            raise ValueError("stall_tolerance must be positive")
        if not 0 < self.relaxation < 2:
            raise ValueError("relaxation must lie in (0, 2)")
        if not self.low_confidence_violation > 0:
            raise ValueError("low_confidence_violation must be positive")


@dataclass(frozen=True)
class ProjectionResult:
    feasible: bool
    x: np.ndarray = field(repr=False)
    max_violation: float
    sweeps: int
    reason: str  # "feasible", "stalled" or "iteration_cap"
    low_confidence: bool


def project_onto_halfspace(point, h: Halfspace) -> np.ndarray:
    x = np.asarray(point, dtype=float).reshape(-1)
    a = h.normal
    if x.shape != a.shape:
        raise ValueError(f"point has dimension {x.shape[0]}, halfspace {a.shape[0]}")
    v = a @ x - h.offset
    if v <= 0:
        return x.copy()
    return x - (v / (a @ a)) * a


def _design(samples: SampleSet, num_basis: Basis, den_basis: Basis, pin: int | None):
    from .rational import BisectionConfig, _pin, _problem

    pin = _pin(den_basis, BisectionConfig(pin_index=pin))
    return _problem(samples, num_basis, den_basis, pin)


def _systems(prob, z: float, delta: float) -> tuple[HalfspaceSystem, HalfspaceSystem]:
    f, G, Hf, hp = prob.f, prob.G, prob.H_free, prob.h_pin
    N, k = G.shape
    d = k + Hf.shape[1]
    pos = np.zeros((N, d))
    neg = np.zeros((N, d))
    # f Q - P <= z Q
    pos[:, :k] = -G
    pos[:, k:] = (f - z)[:, None] * Hf
    pos_b = -(f - z) * hp
    # P - f Q <= z Q
    neg[:, :k] = G
    neg[:, k:] = -(f + z)[:, None] * Hf
    neg_b = (f + z) * hp
    floor = np.zeros((N, d))
    floor[:, k:] = -Hf
    floor_b = hp - delta
    plus = _interleave(pos, pos_b, floor, floor_b)
    minus = _interleave(neg, neg_b, floor, floor_b)
    return plus, minus


def _interleave(A1, b1, A2, b2) -> HalfspaceSystem:
    N, d = A1.shape
    A = np.empty((2 * N, d))
    b = np.empty(2 * N)
    A[0::2], A[1::2] = A1, A2
    b[0::2], b[1::2] = b1, b2
    # zero normal: the row reads 0 <= b, so it is either vacuous or hopeless
    trivial = ~np.any(A != 0, axis=1)
    if np.any(trivial & (b < 0)):
        raise ValueError("denominator cannot reach delta at some sample point")
    keep = ~trivial
    return HalfspaceSystem(A[keep], b[keep])


def build_halfspace_systems(
    samples: SampleSet,
    num_basis: Basis,
    den_basis: Basis,
    z: float,
    delta: float,
    pin_index: int | None = None,
) -> tuple[HalfspaceSystem, HalfspaceSystem]:
    """``(C+(z), C-(z))`` over the joint vector ``(A, B without the pinned entry)``.

    Each system has two halfspaces per sample point: the level constraint
    and ``Q >= delta``.
    """
    if z < 0:
        raise ValueError("z must be non-negative")
    if not delta > 0:
        raise ValueError("delta must be positive")
    return _systems(_design(samples, num_basis, den_basis, pin_index), z, delta)


def canonical_points(samples: SampleSet, num_basis: Basis, den_basis: Basis):
    """Joint vectors ``(A+, B+)`` in ``C+`` and ``(A-, B-)`` in ``C-``.

    ``A+ = (max f, 0, ...)``, ``A- = (min f, 0, ...)`` on the numerator's
    constant function and ``B = e_pin``. Requires constant functions in
    both bases.
    """
    k = num_basis.constant_index()
    if k is None or den_basis.constant_index() is None:
        raise ValueError("canonical points need a constant function in both bases")
    prob = _design(samples, num_basis, den_basis, None)
    return _canonical(prob, k)


def _canonical(prob, k: int):
    d = prob.G.shape[1] + prob.H_free.shape[1]
    scale = prob.h_pin[0] / prob.G[0, k]
    plus = np.zeros(d)
    minus = np.zeros(d)
    plus[k] = prob.f.max() * scale
    minus[k] = prob.f.min() * scale
    return plus, minus


def solve_feasibility_projection(
    systems, start, config: ProjectionConfig | None = None
) -> ProjectionResult:
    """Look for a point in the intersection of all halfspaces in ``systems``.

    ``systems`` is a :class:`HalfspaceSystem` or a sequence of them. One
    iteration is a full cyclic pass (or one averaged step). Feasible once
    every violation is ``<= 1e-8``; infeasible once a sweep moves the
    iterate less than ``stall_tolerance`` while violations remain, or the
    sweep cap is hit.
    """
    config = config or ProjectionConfig()
    if isinstance(systems, HalfspaceSystem):
        system = systems
    else:
        systems = list(systems)
        system = systems[0]
        for s in systems[1:]:
            system = system + s
    x = np.array(start, dtype=float).reshape(-1)
    if x.shape[0] != system.dimension:
        raise ValueError(f"start has dimension {x.shape[0]}, system {system.dimension}")
    cap = config.max_iterations or 10 * len(system)
    if config.precondition:
        col = np.linalg.norm(system.normals, axis=0)
        scale = np.where(col > 0, 1.0 / np.where(col > 0, col, 1.0), 1.0)
        work = HalfspaceSystem(system.normals * scale, system.offsets)
    else:
        scale = np.ones(system.dimension)
        work = system
    A, b = work.normals, work.offsets
    y = x / scale
    viol = system.violation(x)
    sweeps = 0
    while True:
        if viol <= FEASIBILITY_TOL:
            return ProjectionResult(True, x, viol, sweeps, "feasible", False)
        if sweeps >= cap:
            return ProjectionResult(False, x, viol, sweeps, "iteration_cap", True)
        prev = y.copy()
        if config.scheme == "cyclic":
            y = kernels.cyclic_sweep(A, b, y, config.relaxation)
        else:
            y = kernels.simultaneous_step(A, b, y, config.relaxation)
        sweeps += 1
        x = y * scale
        viol = system.violation(x)
        if viol > FEASIBILITY_TOL and np.linalg.norm(y - prev) < config.stall_tolerance:
            low = viol <= config.low_confidence_violation
            return ProjectionResult(False, x, viol, sweeps, "stalled", low)


def projection_verdict(prob, z: float, delta: float, config: ProjectionConfig | None = None):
    """Feasibility verdict for the bisection driver from the projection backend."""
    from .rational import FeasibilityVerdict

    plus, minus = _systems(prob, z, delta)
    d = plus.dimension
    k = None
    for i in range(prob.G.shape[1]):
        col = prob.G[:, i]
        if np.all(col == col[0]) and col[0] != 0:
            k = i
            break
    if k is not None:
        a, c = _canonical(prob, k)
        start = 0.5 * (a + c)
    else:
        start = np.zeros(d)
    res = solve_feasibility_projection(plus + minus, start, config)
    witness = prob.split(res.x) if res.feasible else None
    return FeasibilityVerdict(
        feasible=res.feasible,
        witness=witness,
        backend="projection",
        low_confidence=res.low_confidence,
        max_violation=res.max_violation,
    )
