"""Grid -> samples -> fits -> verified report, plus the flat-file writers."""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .basis import (
    Basis,
    SampleSet,
    generate_grid,
    parse_basis_spec,
    parse_domain,
    sample_function,
)
from .poly import PolyFit, fit_polynomial, residual_surface
from .rational import BisectionConfig, RationalFit, fit_rational

NONZERO_THRESHOLD = 1e-7
VERIFY_TOL = 1e-8
MODES = ("polynomial", "rational", "both")


class ExperimentError(RuntimeError):
    def __init__(self, stage: str, message: str):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage


@dataclass(frozen=True)
class ExperimentConfig:
    function: str
    domain: str  # "-1,1;-1,1"
    step: float
    mode: str = "both"
    poly_basis: str | None = None
    num_basis: str | None = None
    den_basis: str | None = None
    epsilon: float = 1e-4
    delta: float = 1e-6
    backend: str = "lp"
    coefficient_bound: float = 1e6
    out: str | None = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not self.step > 0:
            raise ValueError("step must be positive")
        if self.mode in ("polynomial", "both") and not self.poly_basis:
            raise ValueError("polynomial mode needs poly_basis")
        if self.mode in ("rational", "both") and not (self.num_basis and self.den_basis):
            raise ValueError("rational mode needs num_basis and den_basis")

    @classmethod
    def paper(cls, **overrides) -> "ExperimentConfig":
        """sqrt(|x|+|y|) on [-1,1]^2, step 0.01, 11 coefficients on each side."""
        base = dict(
            function="sqrt_abs_sum",
            domain="-1,1;-1,1",
            step=0.01,
            mode="both",
            poly_basis="paper2d:4:11",
            num_basis="paper2d:2",
            den_basis="paper2d:2",
            epsilon=1e-4,
            delta=1e-6,
            backend="lp",
            coefficient_bound=1e6,
        )
        base.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**base)

    def echo(self) -> dict[str, Any]:
        d = asdict(self)
        d.pop("out")
        return d


@dataclass
class PolynomialReport:
    basis: str
    coefficients: dict[str, float]
    nonzero_pattern: list[str]
    max_deviation: float
    lp_iterations: int


@dataclass
class RationalReport:
    num_basis: str
    den_basis: str
    numerator: dict[str, float]
    denominator: dict[str, float]
    nonzero_pattern: dict[str, list[str]]
    max_deviation: float
    bisection_upper: float
    bracket: list[float]
    initial_bracket: list[float]
    iterations: int
    converged: bool
    min_denominator: float
    trace: list[dict[str, Any]]


@dataclass
class Report:
    config: dict[str, Any]
    grid_size: int
    polynomial: PolynomialReport | None = None
    rational: RationalReport | None = None
    seconds: dict[str, float] = field(default_factory=dict)

    @property
    def max_deviation_polynomial(self) -> float | None:
        return None if self.polynomial is None else self.polynomial.max_deviation

    @property
    def max_deviation_rational(self) -> float | None:
        return None if self.rational is None else self.rational.max_deviation


@dataclass
class ExperimentResult:
    """Report plus the in-memory fits it was built from."""

    report: Report
    samples: SampleSet
    poly_fit: PolyFit | None = None
    rational_fit: RationalFit | None = None


def _table(basis: Basis, coef: np.ndarray) -> dict[str, float]:
    out: dict[str, float] = {}
    for i, (label, value) in enumerate(zip(basis.labels(), coef)):
        key = label if label not in out else f"{label}#{i}"
        out[key] = float(value)
    return out


def _pattern(table: dict[str, float]) -> list[str]:
    return [k for k, v in table.items() if abs(v) > NONZERO_THRESHOLD]


def _stage(stage: str, func, *args, **kwargs):
    try:
        return func(*args, **kwargs)
    except ExperimentError:
        raise
    except Exception as exc:  # surfaced with the stage name
        raise ExperimentError(stage, f"{type(exc).__name__}: {exc}") from exc


def _polynomial(samples: SampleSet, spec: str, dim: int):
    basis = _stage("basis", parse_basis_spec, spec, dim)
    fit = _stage("polynomial", fit_polynomial, samples, basis)
    sweep = residual_surface(fit, samples).max_abs
    if abs(sweep - fit.max_deviation) > VERIFY_TOL:
        raise ExperimentError(
            "verify",
            f"polynomial LP objective {fit.max_deviation!r} disagrees with "
            f"residual sweep {sweep!r}",
        )
    table = _table(basis, fit.coefficients)
    rep = PolynomialReport(
        basis=spec,
        coefficients=table,
        nonzero_pattern=_pattern(table),
        max_deviation=float(sweep),
        lp_iterations=fit.lp_iterations,
    )
    return fit, rep


def _rational(samples: SampleSet, config: ExperimentConfig, dim: int):
    num = _stage("basis", parse_basis_spec, config.num_basis, dim)
    den = _stage("basis", parse_basis_spec, config.den_basis, dim)
    bc = _stage(
        "rational",
        BisectionConfig,
        epsilon=config.epsilon,
        delta=config.delta,
        coefficient_bound=config.coefficient_bound,
        feasibility_backend=config.backend,
    )
    fit = _stage("rational", fit_rational, samples, num, den, bc)
    model = fit.model
    q = model.denominator(samples.points)
    if q.min() < config.delta - 1e-10:
        raise ExperimentError("verify", f"denominator {q.min()!r} below delta at a sample point")
    sweep = float(np.max(np.abs(samples.values - model.numerator(samples.points) / q)))
    if sweep > fit.max_deviation + 1e-7:
        raise ExperimentError(
            "verify",
            f"rational residual sweep {sweep!r} exceeds bisection bound {fit.max_deviation!r}",
        )
    ntab = _table(num, model.A)
    dtab = _table(den, model.B)
    rep = RationalReport(
        num_basis=config.num_basis,
        den_basis=config.den_basis,
        numerator=ntab,
        denominator=dtab,
        nonzero_pattern={"numerator": _pattern(ntab), "denominator": _pattern(dtab)},
        max_deviation=sweep,
        bisection_upper=float(fit.max_deviation),
        bracket=[float(v) for v in fit.bracket],
        initial_bracket=[float(v) for v in fit.initial_bracket],
        iterations=fit.iterations,
        converged=fit.converged,
        min_denominator=float(q.min()),
        trace=[
            {
                "z": e.z,
                "feasible": e.feasible,
                "lower": e.lower,
                "upper": e.upper,
                "u_tilde": e.u_tilde if e.u_tilde is None or np.isfinite(e.u_tilde) else None,
                "backend": e.backend,
            }
            for e in fit.trace
        ],
    )
    return fit, rep


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Run the configured fits on one shared sample set and verify them."""
    domain = _stage("grid", parse_domain, config.domain)
    points = _stage("grid", generate_grid, domain, config.step)
    samples = _stage("sample", sample_function, config.function, points)
    dim = domain.dimension
    report = Report(config=config.echo(), grid_size=len(samples))
    result = ExperimentResult(report, samples)
    if config.mode in ("polynomial", "both"):
        result.poly_fit, report.polynomial = _polynomial(samples, config.poly_basis, dim)
        report.seconds["polynomial"] = result.poly_fit.solve_time
    if config.mode in ("rational", "both"):
        result.rational_fit, report.rational = _rational(samples, config, dim)
        report.seconds["rational"] = result.rational_fit.solve_time
    return result


# -- writers ----------------------------------------------------------------


def _atomic_write(path: Path, text: str):
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _surface_text(fit, samples: SampleSet) -> str:
    if isinstance(fit, RationalFit):
        approx = fit.model(samples.points)
    else:
        approx = np.asarray(fit(samples.points), dtype=float)
    resid = samples.values - approx
    cols = [f"x{i + 1}" for i in range(samples.dimension)] + ["f", "approx", "residual"]
    data = np.column_stack([samples.points, samples.values, approx, resid])
    lines = [",".join(cols)]
    lines.extend(",".join(f"{v:.9g}" for v in row) for row in data)
    return "\n".join(lines) + "\n"


def emit_surface_csv(fit, samples: SampleSet, path) -> Path:
    """Write ``x1,...,xl,f,approx,residual`` for every sample, in point order.

    ``fit`` is a :class:`PolyFit`, a :class:`RationalFit`, or anything
    callable on an ``(N, l)`` array. Values carry 9 significant digits.
    """
    path = Path(path)
    _atomic_write(path, _surface_text(fit, samples))
    return path


def report_to_dict(report: Report, include_timing: bool = False) -> dict[str, Any]:
    out: dict[str, Any] = {"config": report.config, "grid_size": report.grid_size}
    if report.polynomial is not None:
        out["max_deviation_polynomial"] = report.polynomial.max_deviation
    if report.rational is not None:
        out["max_deviation_rational"] = report.rational.max_deviation
    if report.polynomial is not None and report.rational is not None:
        out["rational_beats_polynomial"] = (
            report.rational.max_deviation < report.polynomial.max_deviation
        )
    if report.polynomial is not None:
        out["polynomial"] = asdict(report.polynomial)
    if report.rational is not None:
        out["rational"] = asdict(report.rational)
    if include_timing:
        out["seconds"] = dict(report.seconds)
    return out


def emit_report(report: Report, path, include_timing: bool = False) -> Path:
    """JSON report with a fixed key order.

    Wall-clock times are left out unless ``include_timing`` is set, so two
    runs of the same configuration give byte-identical files.
    """
    text = json.dumps(report_to_dict(report, include_timing), indent=2, allow_nan=False)
    path = Path(path)
    _atomic_write(path, text + "\n")
    return path


def load_report(path) -> Report:
    data = json.loads(Path(path).read_text())
    poly = data.get("polynomial")
    rat = data.get("rational")
    return Report(
        config=data["config"],
        grid_size=data["grid_size"],
        polynomial=PolynomialReport(**poly) if poly is not None else None,
        rational=RationalReport(**rat) if rat is not None else None,
        seconds=data.get("seconds", {}),
    )


def write_outputs(result: ExperimentResult, out_dir) -> dict[str, Path]:
    """Report, surface CSVs and a timing sidecar in ``out_dir``.

    Everything is computed before the first file is written.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rep = result.report
    files = {"report": ("report.json", json.dumps(report_to_dict(rep), indent=2, allow_nan=False) + "\n")}
    if result.poly_fit is not None:
        files["surface_polynomial"] = (
            "surface_polynomial.csv",
            _surface_text(result.poly_fit, result.samples),
        )
    if result.rational_fit is not None:
        files["surface_rational"] = (
            "surface_rational.csv",
            _surface_text(result.rational_fit, result.samples),
        )
    files["timing"] = ("timing.json", json.dumps(rep.seconds, indent=2) + "\n")
    written = {}
    for key, (name, text) in files.items():
        _atomic_write(out / name, text)
        written[key] = out / name
    return written
