"""Acceptance criteria, one test each.

Every test prints a single ``ACCEPTANCE <n> PASS|FAIL`` line (shown with
``-s``) and the same lines are repeated in the terminal summary.
"""

import json
import math

import numpy as np
import pytest

import conftest
from conftest import vertex_enumeration
from multicheb.basis import (
    Basis,
    Domain,
    SampleSet,
    enumerate_monomials,
    generate_grid,
    parse_basis_spec,
    sample_function,
)
from multicheb.cli import main
from multicheb.lp import LinearProgram, LpStatus, solve
from multicheb.poly import fit_polynomial
from multicheb.projection import projection_verdict
from multicheb.rational import BisectionConfig, _problem, check_feasibility, fit_rational

EPS = 1e-4


def report(n, title, ok, detail=""):
    line = f"ACCEPTANCE {n} {'PASS' if ok else 'FAIL'}: {title}" + (f" ({detail})" if detail else "")
    print(line)
    conftest.ACCEPTANCE_LINES.append(line)
    assert ok, line


@pytest.fixture(scope="module")
def paper_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("paper_a")
    assert main(["--paper", "--out", str(out)]) == 0
    return out


def load(out):
    return json.loads((out / "report.json").read_text())


def test_1_polynomial_table(tmp_path):
    assert main(["--paper", "--mode", "polynomial", "--out", str(tmp_path)]) == 0
    poly = load(tmp_path)["polynomial"]
    coef = poly["coefficients"]
    table = {"1": 0.2944, "x^2": 1.6439, "y^2": 0.7638, "x^4": -1.1611}
    dev_ok = abs(poly["max_deviation"] - 0.2944) <= 5e-4
    coef_ok = all(abs(coef[k] - v) <= 2e-2 for k, v in table.items())
    rest = max(abs(v) for k, v in coef.items() if k not in table)
    report(1, "polynomial fit reproduces the 11-term table", dev_ok and coef_ok and rest < 1e-3,
           f"max_deviation={poly['max_deviation']:.6f}, largest other |coef|={rest:.2e}")


def test_2_rational_table(tmp_path, paper_samples):
    assert main(["--paper", "--mode", "rational", "--epsilon", "1e-4", "--out", str(tmp_path)]) == 0
    rat = load(tmp_path)["rational"]
    a, b = rat["numerator"], rat["denominator"]
    dev_ok = abs(rat["max_deviation"] - 0.1720) <= 5e-4
    a_ok = all(abs(a[k] - 6.6221) <= 2e-2 for k in ("x^2", "y^2"))
    b_ok = all(abs(b[k] - 4.90) <= 2e-2 for k in ("x^2", "y^2"))
    small = max(abs(t[k]) for t in (a, b) for k in ("x", "y", "x*y"))
    den = parse_basis_spec("paper2d:2", 2)
    q = den.design_matrix(paper_samples.points) @ np.array(list(b.values()))
    q_ok = len(q) == 40401 and q.min() >= 1e-6
    report(2, "rational fit reproduces the degree-2 over degree-2 table",
           dev_ok and a_ok and b_ok and small < 1e-2 and q_ok,
           f"max_deviation={rat['max_deviation']:.6f}, a3={a['x^2']:.4f}, a4={a['y^2']:.4f}, "
           f"b3={b['x^2']:.4f}, b4={b['y^2']:.4f}, min Q={q.min():.4f}")


def test_3_rational_beats_polynomial(paper_run):
    data = load(paper_run)
    p, r = data["max_deviation_polynomial"], data["max_deviation_rational"]
    report(3, "rational max deviation below polynomial", r < p and data["rational_beats_polynomial"],
           f"{r:.6f} < {p:.6f}")


def test_4_bisection_mechanics(paper_run):
    rat = load(paper_run)["rational"]
    l0, u0 = rat["initial_bracket"]
    ok = l0 == 0.0 and abs(u0 - math.sqrt(2) / 2) <= 1e-9
    lo, hi = l0, u0
    feas, infeas = [], []
    for k, e in enumerate(rat["trace"], start=1):
        ok &= e["z"] == 0.5 * (lo + hi)
        lo, hi = (lo, e["z"]) if e["feasible"] else (e["z"], hi)
        ok &= (e["lower"], e["upper"]) == (lo, hi)
        ok &= abs((hi - lo) - (u0 - l0) * 2.0**-k) <= 4 * np.spacing(u0)
        (feas if e["feasible"] else infeas).append(e["z"])
    ok &= max(infeas) < min(feas)
    ok &= hi - lo < EPS and [lo, hi] == rat["bracket"]
    report(4, "bisection starts at sqrt(2)/2, halves, stays monotone, stops below epsilon", ok,
           f"{len(rat['trace'])} steps, final width {hi - lo:.2e}")


def _random_lp(seed):
    rng = np.random.default_rng(10_000 + seed)
    d = int(rng.integers(1, 5))
    n_rand = int(rng.integers(0, 12 - 2 * d + 1))
    A = np.vstack([rng.normal(size=(n_rand, d)), np.eye(d), -np.eye(d)])
    b = np.concatenate([A[:n_rand] @ rng.uniform(-1, 1, size=d) + rng.uniform(0, 2, size=n_rand),
                        rng.uniform(1, 4, size=2 * d)])
    return LinearProgram(rng.normal(size=d), A, b)


def test_5_oracle_equivalence():
    worst = 0.0
    ok = True
    for seed in range(25):
        lp = _random_lp(seed)
        assert lp.n_vars <= 4 and lp.n_rows <= 12
        best, _ = vertex_enumeration(lp.objective, lp.A_ub, lp.b_ub)
        sol = solve(lp)
        ok &= sol.status is LpStatus.OPTIMAL
        if sol.status is LpStatus.OPTIMAL:
            worst = max(worst, abs(sol.objective_value - best))
    pts = np.array([[-1.0], [-0.5], [0.0], [0.5], [1.0]])
    fit = fit_polynomial(SampleSet(pts, np.abs(pts[:, 0])), Basis.from_exponents([(0,), (1,)]))
    abs_err = max(abs(fit.max_deviation - 0.5), abs(fit.coefficients[0] - 0.5), abs(fit.coefficients[1]))
    report(5, "25 random LPs match vertex enumeration; |x| five-point fit exact",
           ok and worst <= 1e-7 and abs_err <= 1e-9,
           f"worst LP gap {worst:.1e}, |x| error {abs_err:.1e}")


def test_6_exact_representation():
    pts = generate_grid(Domain.cube(-1, 1, 2), 0.05)
    runge = fit_rational(sample_function("runge2d", pts), parse_basis_spec("(0,0)", 2),
                         parse_basis_spec("(0,0);(2,0);(0,2)", 2))
    basis = enumerate_monomials(2, 3)
    coef = np.random.default_rng(0).normal(size=len(basis))
    poly = fit_polynomial(SampleSet(pts, basis.design_matrix(pts) @ coef), basis)
    report(6, "exactly representable targets are recovered",
           runge.max_deviation <= EPS and poly.max_deviation <= 1e-8,
           f"runge2d {runge.max_deviation:.1e}, cubic {poly.max_deviation:.1e}")


def test_7_backend_agreement():
    rng = np.random.default_rng(0)
    pts = generate_grid(Domain.cube(-1, 1, 2), 0.25)
    lin = enumerate_monomials(2, 1)
    cfg = BisectionConfig(epsilon=EPS)
    checked = disagree = 0
    for _ in range(20):
        c = rng.normal(size=6)
        vals = np.exp(c[0] * pts[:, 0] + c[1] * pts[:, 1]) + c[2] * np.abs(pts[:, 0] - 0.3 * c[3])
        s = SampleSet(pts, vals)
        lo, hi = fit_rational(s, lin, lin, cfg).bracket
        prob = _problem(s, lin, lin, 0)
        for z in (hi + 10 * EPS, lo - 10 * EPS):
            if z < 0:
                continue
            raw = projection_verdict(prob, z, cfg.delta)
            lp = check_feasibility(s, lin, lin, z, cfg)
            checked += 1
            disagree += raw.feasible != lp.feasible
    report(7, "raw projection verdicts agree with the LP away from the optimum",
           disagree == 0 and checked >= 20, f"{checked} levels on 20 instances, {disagree} disagreements")


def test_8_determinism(paper_run, tmp_path):
    assert main(["--paper", "--out", str(tmp_path)]) == 0
    names = ("report.json", "surface_polynomial.csv", "surface_rational.csv")
    same = all((paper_run / n).read_bytes() == (tmp_path / n).read_bytes() for n in names)
    report(8, "two --paper runs give byte-identical report and surfaces", same)
