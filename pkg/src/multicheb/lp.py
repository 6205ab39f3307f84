"""Dense LP solver for ``min c.x  s.t.  A x <= b`` with few variables, many rows.

The solver never touches the primal directly. It runs a two-phase revised
simplex on the dual in standard form::

    min  b.y   s.t.  A^T y = -c,   y >= 0

whose basis is only ``d x d`` however many rows ``A`` has. The simplex
multipliers of that problem are exactly the primal point ``x``: the reduced
cost of dual column ``j`` is the slack ``b_j - a_j.x``, so dual optimality is
primal feasibility. Each iteration costs one ``N x d`` pricing pass plus a
few ``d x d`` solves.

Rows are scaled to unit Euclidean norm before solving, so tolerances act
on distances rather than raw residuals.
"""

from __future__ import annotations

import enum
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from . import kernels

log = logging.getLogger(__name__)

DUMP_ENV = "MULTICHEB_LP_DUMP"


class LpStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    NUMERICAL_FAILURE = "numerical_failure"


@dataclass(frozen=True)
class LpTolerances:
    feas_tol: float = 1e-9
    opt_tol: float = 1e-9
    pivot_tol: float = 1e-10


@dataclass(frozen=True)
class LinearProgram:
    """``min objective.x`` subject to ``A_ub x <= b_ub`` and optional bounds.

    ``lower``/``upper`` default to free variables; infinite entries mean no
    bound. Bounds are turned into extra rows at solve time.
    """

    objective: np.ndarray
    A_ub: np.ndarray
    b_ub: np.ndarray
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None

    def __post_init__(self):
        c = np.asarray(self.objective, dtype=float).reshape(-1)
        d = c.shape[0]
        A = np.asarray(self.A_ub, dtype=float)
        if A.size == 0:
            A = A.reshape(0, d)
        A = np.ascontiguousarray(A)
        b = np.asarray(self.b_ub, dtype=float).reshape(-1)
        if d < 1:
            raise ValueError("LP needs at least one variable")
        if A.ndim != 2 or A.shape[1] != d:
            raise ValueError(f"constraint matrix shape {A.shape} does not match {d} variables")
        if b.shape[0] != A.shape[0]:
            raise ValueError(f"{A.shape[0]} rows but {b.shape[0]} right-hand sides")
        if not (np.all(np.isfinite(c)) and np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
            raise ValueError("LP data must be finite")
        lo = np.full(d, -np.inf) if self.lower is None else np.asarray(self.lower, float)
        hi = np.full(d, np.inf) if self.upper is None else np.asarray(self.upper, float)
        if lo.shape != (d,) or hi.shape != (d,):
            raise ValueError("bounds must have one entry per variable")
        if np.any(np.isnan(lo)) or np.any(np.isnan(hi)):
            raise ValueError("bounds must not be NaN")
        object.__setattr__(self, "objective", c)
        object.__setattr__(self, "A_ub", A)
        object.__setattr__(self, "b_ub", b)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def n_vars(self) -> int:
        return self.objective.shape[0]

    @property
    def n_rows(self) -> int:
        return self.A_ub.shape[0]

    def bound_rows(self) -> tuple[np.ndarray, np.ndarray]:
        d = self.n_vars
        eye = np.eye(d)
        up = np.flatnonzero(np.isfinite(self.upper))
        lo = np.flatnonzero(np.isfinite(self.lower))
        A = np.vstack([eye[up], -eye[lo]]) if up.size + lo.size else np.zeros((0, d))
        b = np.concatenate([self.upper[up], -self.lower[lo]])
        return A, b

    def inequality_form(self) -> tuple[np.ndarray, np.ndarray]:
        """All constraints, bounds included, as one ``(A, b)`` pair."""
        Ab, bb = self.bound_rows()
        if bb.size == 0:
            return self.A_ub, self.b_ub
        return np.vstack([self.A_ub, Ab]), np.concatenate([self.b_ub, bb])


@dataclass
class LpSolution:
    status: LpStatus
    x: np.ndarray | None = None
    objective_value: float | None = None
    iterations: int = 0
    ray: np.ndarray | None = None
    farkas: np.ndarray | None = None
    message: str = ""

    @property
    def optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL


@dataclass
class VerificationReport:
    max_violation: float
    worst_row: int
    objective_error: float
    passed: bool


class _Singular(Exception):
    pass


@dataclass
class _Work:
    """Standard-form working problem ``min g.w, E w = h, w >= 0``.

    ``cols[j]`` is column ``j`` of ``E``; the last ``m`` columns are the
    phase-one artificials.
    """

    cols: np.ndarray
    h: np.ndarray
    n_struct: int
    basis: np.ndarray
    tol: LpTolerances
    max_iter: int
    bland_after: int
    iterations: int = 0
    lu: tuple | None = field(default=None, repr=False)

    @property
    def m(self) -> int:
        return self.h.shape[0]

    def factor(self):
        B = self.cols[self.basis].T
        lu, piv = lu_factor(B, check_finite=False)
        diag = np.abs(np.diag(lu))
        if diag.min() <= 1e-13 * max(1.0, diag.max()):
            raise _Singular()
        self.lu = (lu, piv)

    def primal(self):
        return lu_solve(self.lu, self.h, check_finite=False)

    def multipliers(self, cost_b):
        return lu_solve(self.lu, cost_b, trans=1, check_finite=False)

    def direction(self, j):
        return lu_solve(self.lu, self.cols[j], check_finite=False)


def _ratio_test(w, work: _Work, dB, bland: bool, pinned: bool):
    pivot_tol = work.tol.pivot_tol
    art = work.basis >= work.n_struct
    if not pinned:
        art[:] = False
    # in phase two basic artificials sit at zero: any nonzero entry blocks
    blocking = (dB > pivot_tol) | (art & (np.abs(dB) > pivot_tol))
    if not blocking.any():
        return -1
    idx = np.flatnonzero(blocking)
    ratios = np.where(art[idx], 0.0, np.maximum(w[idx], 0.0) / np.abs(dB[idx]))
    tmin = ratios.min()
    tied = idx[ratios <= tmin + 1e-12 * (1.0 + tmin)]
    if bland:
        return int(tied[np.argmin(work.basis[tied])])
    # largest pivot among ties, then lowest position
    return int(tied[np.argmax(np.abs(dB[tied]))])


def _iterate(
    work: _Work,
    cost: np.ndarray,
    n_price: int,
    stop_at: float | None = None,
    pinned: bool = False,
):
    """Run simplex pivots until optimal or unbounded.

    Returns ``("optimal", pi)`` or ``("unbounded", (j, dB))``. ``stop_at``
    ends the run early once the objective drops to that level (phase one).
    """
    tol = work.tol
    best = np.inf
    stall = 0
    bland = False
    while True:
        if work.iterations >= work.max_iter:
            raise RuntimeError(f"simplex iteration cap {work.max_iter} reached")
        work.factor()
        w = work.primal()
        obj = float(cost[work.basis] @ np.maximum(w, 0.0))
        if not np.isfinite(best) or obj < best - 1e-12 * (1.0 + abs(best)):
            best = obj
            stall = 0
            bland = False
        else:
            stall += 1
            if stall >= work.bland_after and not bland:
                log.debug("switching to Bland's rule after %d stalled pivots", stall)
                bland = True
        pi = work.multipliers(cost[work.basis])
        if stop_at is not None and obj <= stop_at:
            return "optimal", pi
        r, j = kernels.price(work.cols[:n_price], cost[:n_price], pi)
        if bland:
            j = kernels.first_below(r, -tol.opt_tol)
            if j < 0:
                return "optimal", pi
        elif r[j] >= -tol.opt_tol:
            return "optimal", pi
        dB = work.direction(j)
        k = _ratio_test(w, work, dB, bland, pinned)
        if k < 0:
            return "unbounded", (j, dB)
        work.basis[k] = j
        work.iterations += 1


def _drive_out_artificials(work: _Work):
    """Swap zero-level artificials out of the basis where a structural column allows."""
    for k in range(work.m):
        if work.basis[k] < work.n_struct:
            continue
        work.factor()
        # row k of B^-1 E over structural columns
        e_k = np.zeros(work.m)
        e_k[k] = 1.0
        rho = lu_solve(work.lu, e_k, trans=1, check_finite=False)
        row = work.cols[: work.n_struct] @ rho
        in_basis = np.zeros(work.n_struct, dtype=bool)
        in_basis[work.basis[work.basis < work.n_struct]] = True
        row[in_basis] = 0.0
        j = int(np.argmax(np.abs(row)))
        if abs(row[j]) > 1e-7:
            work.basis[k] = j
            work.iterations += 1
        # otherwise the equality is redundant and the artificial stays at 0


def _scaled(A, b):
    norms = np.sqrt(np.einsum("ij,ij->i", A, A))
    zero = norms == 0.0
    norms[zero] = 1.0
    return A / norms[:, None], b / norms, norms, zero


def solve(
    lp: LinearProgram,
    tolerances: LpTolerances | None = None,
    *,
    max_iterations: int | None = None,
    bland_after: int | None = None,
) -> LpSolution:
    """Solve ``lp``; see the module docstring for the method.

    Never raises for a well-formed LP. Singular bases or an exhausted
    iteration budget come back as ``LpStatus.NUMERICAL_FAILURE``.
    """
    tol = tolerances or LpTolerances()
    dump_dir = os.environ.get(DUMP_ENV)
    if dump_dir:
        _dump_numbered(lp, Path(dump_dir))
    A, b = lp.inequality_form()
    d = lp.n_vars
    c = lp.objective

    # 0.x <= b rows: drop if satisfied, otherwise the LP is infeasible outright
    An, bn, norms, zero = _scaled(A, b)
    if np.any(bn[zero] < -tol.feas_tol):
        bad = int(np.flatnonzero(zero & (bn < -tol.feas_tol))[0])
        y = np.zeros(A.shape[0])
        y[bad] = 1.0
        return LpSolution(LpStatus.INFEASIBLE, farkas=y, message=f"row {bad} reads 0 <= {b[bad]}")
    keep = np.flatnonzero(~zero)
    An, bn = An[keep], bn[keep]
    N = An.shape[0]
    if N == 0:
        if np.any(c != 0.0):
            return LpSolution(LpStatus.UNBOUNDED, x=np.zeros(d), ray=-c.copy(),
                              message="no constraints")
        return LpSolution(LpStatus.OPTIMAL, x=np.zeros(d), objective_value=0.0)
    max_iter = max_iterations if max_iterations is not None else 50 * (N + d)
    bland_trigger = bland_after if bland_after is not None else 10 * (N + d)

    try:
        return _solve_scaled(lp, An, bn, norms[keep], keep, A.shape[0], tol, max_iter, bland_trigger)
    except _Singular:
        return LpSolution(LpStatus.NUMERICAL_FAILURE, message="singular basis")
    except RuntimeError as exc:
        return LpSolution(LpStatus.NUMERICAL_FAILURE, message=str(exc))


def _solve_scaled(lp, An, bn, norms, keep, n_rows_all, tol, max_iter, bland_trigger):
    d = lp.n_vars
    c = lp.objective
    N = An.shape[0]
    h = -c
    flip = np.where(h < 0, -1.0, 1.0)
    cols = np.empty((N + d, d))
    cols[:N] = An * flip
    cols[N:] = np.eye(d)
    work = _Work(
        cols=cols,
        h=h * flip,
        n_struct=N,
        basis=np.arange(N, N + d),
        tol=tol,
        max_iter=max_iter,
        bland_after=bland_trigger,
    )

    # phase one: minimise the artificials
    cost1 = np.concatenate([np.zeros(N), np.ones(d)])
    scale = 1.0 + float(np.abs(c).max())
    state, pi1 = _iterate(work, cost1, N, stop_at=tol.feas_tol * 1e-3)
    w = work.primal()
    infeas = float(np.maximum(w, 0.0)[work.basis >= N].sum())
    if infeas > tol.feas_tol * scale:
        # A w <= 0 with c.w < 0: an improving direction for the primal
        ray = flip * pi1
        return _dual_infeasible(lp, ray, work.iterations, tol)

    _drive_out_artificials(work)

    # phase two
    cost2 = np.concatenate([bn, np.zeros(d)])
    state, payload = _iterate(work, cost2, N, pinned=True)
    if state == "unbounded":
        j, dB = payload
        y = np.zeros(N)
        y[j] = 1.0
        structural = work.basis < N
        y[work.basis[structural]] = -dB[structural]
        y = np.maximum(y, 0.0)
        residual = np.abs(An.T @ y).max()
        gap = float(bn @ y)
        if gap < -tol.feas_tol and residual <= 1e-7 * max(1.0, y.sum()):
            farkas = np.zeros(n_rows_all)
            farkas[keep] = y / norms
            return LpSolution(
                LpStatus.INFEASIBLE,
                iterations=work.iterations,
                farkas=farkas,
                message="constraints are inconsistent",
            )
        return LpSolution(
            LpStatus.NUMERICAL_FAILURE,
            iterations=work.iterations,
            message="infeasibility certificate failed verification",
        )

    x = flip * payload
    slack = bn - An @ x
    # dual multipliers of the primal rows must stay non-negative
    w = work.primal()
    if w.min() < -1e-7 * (1.0 + np.abs(w).max()):
        return LpSolution(
            LpStatus.NUMERICAL_FAILURE,
            iterations=work.iterations,
            message=f"basis lost dual feasibility ({w.min():.3g})",
        )
    if slack.min() < -10 * tol.feas_tol:
        return LpSolution(
            LpStatus.NUMERICAL_FAILURE,
            iterations=work.iterations,
            message=f"optimal basis violates a row by {-slack.min():.3g}",
        )
    return LpSolution(
        LpStatus.OPTIMAL,
        x=x,
        objective_value=float(c @ x),
        iterations=work.iterations,
    )


def _dual_infeasible(lp: LinearProgram, ray, iterations, tol) -> LpSolution:
    """Primal is unbounded if feasible at all; find out which."""
    probe = solve(
        LinearProgram(np.zeros(lp.n_vars), lp.A_ub, lp.b_ub, lp.lower, lp.upper), tol
    )
    total = iterations + probe.iterations
    if probe.status is LpStatus.OPTIMAL:
        return LpSolution(
            LpStatus.UNBOUNDED,
            x=probe.x,
            iterations=total,
            ray=ray,
            message="feasible with an improving ray",
        )
    probe.iterations = total
    return probe


def verify_solution(
    lp: LinearProgram, sol: LpSolution, tolerances: LpTolerances | None = None
) -> VerificationReport:
    """Recheck an optimal solution against the raw (unscaled) LP data."""
    tol = tolerances or LpTolerances()
    if sol.x is None:
        raise ValueError(f"no point to verify for status {sol.status.value}")
    A, b = lp.inequality_form()
    x = np.asarray(sol.x, dtype=float)
    if A.shape[0]:
        viol = A @ x - b
        worst = int(np.argmax(viol))
        max_viol = max(float(viol[worst]), 0.0)
    else:
        worst, max_viol = -1, 0.0
    obj = float(lp.objective @ x)
    reported = sol.objective_value if sol.objective_value is not None else obj
    obj_err = abs(reported - obj)
    row_scale = 1.0 + float(np.abs(A).max()) * float(np.abs(x).max()) if A.size else 1.0
    passed = max_viol <= tol.feas_tol * row_scale and obj_err <= 1e-9 * (1.0 + abs(obj))
    return VerificationReport(max_viol, worst if max_viol > 0 else -1, obj_err, passed)


def dump_lp(lp: LinearProgram, path: str | os.PathLike) -> Path:
    """Write ``lp`` as plain text.

    Format::

        # objective
        c_1 c_2 ... c_d
        # rows: a_1 ... a_d b   (meaning a.x <= b; bound rows included)
        ...
    """
    path = Path(path)
    A, b = lp.inequality_form()
    with path.open("w") as fh:
        fh.write("# objective\n")
        fh.write(" ".join(repr(float(v)) for v in lp.objective) + "\n")
        fh.write(f"# rows {A.shape[0]}: a_1 ... a_{lp.n_vars} b  (a.x <= b)\n")
        for row, rhs in zip(A, b):
            fh.write(" ".join(repr(float(v)) for v in row) + f" {float(rhs)!r}\n")
    return path


_dump_counter = 0


def _dump_numbered(lp: LinearProgram, directory: Path):
    global _dump_counter
    directory.mkdir(parents=True, exist_ok=True)
    _dump_counter += 1
    dump_lp(lp, directory / f"lp_{_dump_counter:05d}.txt")
