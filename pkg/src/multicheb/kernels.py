"""Hot inner loops, each in a numba and a pure-numpy flavour.

The public names (``price``, ``cyclic_sweep``, ...) are bound to the numba
versions unless ``MULTICHEB_DISABLE_NUMBA`` is set. Both flavours stay
importable under ``*_numba`` / ``*_numpy`` so tests and the benchmark can
compare them directly.

All kernels break ties towards the lowest index so results do not depend
on the flavour in use beyond floating-point summation order.
"""

from __future__ import annotations

import numpy as np

from ._accel import USE_NUMBA, njit

# -- simplex pricing --------------------------------------------------------


def price_numpy(cols, cost, pi):
    """Reduced costs ``cost - cols @ pi`` and the index of the smallest one."""
    r = cost - cols @ pi
    return r, int(np.argmin(r))


def _price_loop(cols, cost, pi):
    n, m = cols.shape
    r = np.empty(n)
    best = 0
    best_val = np.inf
    for j in range(n):
        acc = cost[j]
        for i in range(m):
            acc -= cols[j, i] * pi[i]
        r[j] = acc
        if acc < best_val:
            best_val = acc
            best = j
    return r, best


price_numba = njit(_price_loop)


def first_below_numpy(r, threshold):
    """Lowest index with ``r[j] < threshold``, or -1."""
    hits = np.flatnonzero(r < threshold)
    return int(hits[0]) if hits.size else -1


def _first_below_loop(r, threshold):
    for j in range(r.shape[0]):
        if r[j] < threshold:
            return j
    return -1


first_below_numba = njit(_first_below_loop)

# -- halfspace projections --------------------------------------------------


def cyclic_sweep_numpy(normals, offsets, x, relax):
    """One in-place pass of successive projections onto ``a_i . x <= b_i``.

    ``normals`` must have unit rows. Sequential by nature, so the numpy
    flavour is a plain Python loop over rows.
    """
    for i in range(normals.shape[0]):
        a = normals[i]
        v = a @ x - offsets[i]
        if v > 0.0:
            x -= (relax * v) * a
    return x


def _cyclic_sweep_loop(normals, offsets, x, relax):
    n, d = normals.shape
    for i in range(n):
        v = -offsets[i]
        for k in range(d):
            v += normals[i, k] * x[k]
        if v > 0.0:
            s = relax * v
            for k in range(d):
                x[k] -= s * normals[i, k]
    return x


cyclic_sweep_numba = njit(_cyclic_sweep_loop)


def simultaneous_step_numpy(normals, offsets, x, relax):
    """Averaged projection step onto all halfspaces (unit ``normals``)."""
    v = normals @ x - offsets
    np.maximum(v, 0.0, out=v)
    return x - (relax / normals.shape[0]) * (normals.T @ v)


def _simultaneous_step_loop(normals, offsets, x, relax):
    n, d = normals.shape
    shift = np.zeros(d)
    for i in range(n):
        v = -offsets[i]
        for k in range(d):
            v += normals[i, k] * x[k]
        if v > 0.0:
            for k in range(d):
                shift[k] += v * normals[i, k]
    out = np.empty(d)
    scale = relax / n
    for k in range(d):
        out[k] = x[k] - scale * shift[k]
    return out


simultaneous_step_numba = njit(_simultaneous_step_loop)


def max_violation_numpy(normals, offsets, x):
    """``max_i (a_i . x - b_i)``; negative when strictly inside every halfspace."""
    return float(np.max(normals @ x - offsets))


def _max_violation_loop(normals, offsets, x):
    n, d = normals.shape
    worst = -np.inf
    for i in range(n):
        v = -offsets[i]
        for k in range(d):
            v += normals[i, k] * x[k]
        if v > worst:
            worst = v
    return worst


max_violation_numba = njit(_max_violation_loop)

# -- monomial design matrix -------------------------------------------------


def monomial_design_numpy(points, exponents):
    """Matrix ``D[p, k] = prod_i points[p, i] ** exponents[k, i]``."""
    out = np.ones((points.shape[0], exponents.shape[0]))
    for k, e in enumerate(exponents):
        for i, power in enumerate(e):
            if power:
                out[:, k] *= points[:, i] ** int(power)
    return out


def _monomial_design_loop(points, exponents):
    n, l = points.shape
    K = exponents.shape[0]
    out = np.empty((n, K))
    for p in range(n):
        for k in range(K):
            acc = 1.0
            for i in range(l):
                e = exponents[k, i]
                if e:
                    base = points[p, i]
                    term = 1.0
                    for _ in range(e):
                        term *= base
                    acc *= term
            out[p, k] = acc
    return out


monomial_design_numba = njit(_monomial_design_loop)


if USE_NUMBA:
    price = price_numba
    first_below = first_below_numba
    cyclic_sweep = cyclic_sweep_numba
    simultaneous_step = simultaneous_step_numba
    max_violation = max_violation_numba
    monomial_design = monomial_design_numba
    BACKEND = "numba"
else:
    price = price_numpy
    first_below = first_below_numpy
    cyclic_sweep = cyclic_sweep_numpy
    simultaneous_step = simultaneous_step_numpy
    max_violation = max_violation_numpy
    monomial_design = monomial_design_numpy
    BACKEND = "numpy"
