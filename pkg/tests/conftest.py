import itertools

import numpy as np
import pytest

from multicheb.basis import Domain, enumerate_monomials, generate_grid, sample_function, truncate_basis


def vertex_enumeration(c, A, b, tol=1e-9):
    """Brute-force LP oracle: best feasible vertex of ``A x <= b``.

    Tries every ``d``-subset of rows as the active set. Only valid when
    the optimum is attained at a vertex (bounded LP, full-rank ``A``).
    Returns ``(value, x)`` or ``(None, None)`` if no vertex is feasible.
    """
    c = np.asarray(c, float)
    A = np.asarray(A, float)
    b = np.asarray(b, float)
    d = c.shape[0]
    best, arg = None, None
    for rows in itertools.combinations(range(A.shape[0]), d):
        M = A[list(rows)]
        if abs(np.linalg.det(M)) < 1e-12:
            continue
        x = np.linalg.solve(M, b[list(rows)])
        if np.all(A @ x <= b + tol):
            val = float(c @ x)
            if best is None or val < best:
                best, arg = val, x
    return best, arg


@pytest.fixture(scope="session")
def paper_basis():
    return truncate_basis(enumerate_monomials(2, 4, "paper2d"), 11)


@pytest.fixture(scope="session")
def paper_rational_basis():
    return enumerate_monomials(2, 2, "paper2d")


@pytest.fixture(scope="session")
def paper_samples():
    pts = generate_grid(Domain.cube(-1.0, 1.0, 2), 0.01)
    return sample_function("sqrt_abs_sum", pts)


@pytest.fixture(scope="session")
def coarse_samples():
    pts = generate_grid(Domain.cube(-1.0, 1.0, 2), 0.1)
    return sample_function("sqrt_abs_sum", pts)


@pytest.fixture(scope="session")
def paper_poly_fit(paper_samples, paper_basis):
    from multicheb.poly import fit_polynomial

    return fit_polynomial(paper_samples, paper_basis)


@pytest.fixture(scope="session")
def paper_rational_fit(paper_samples, paper_rational_basis):
    from multicheb.rational import BisectionConfig, fit_rational

    b = paper_rational_basis
    return fit_rational(paper_samples, b, b, BisectionConfig())


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
