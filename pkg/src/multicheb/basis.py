"""Monomial and named bases, box grids and sampled target functions."""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from . import kernels

__all__ = [
    "Monomial",
    "NamedFunction",
    "Basis",
    "Domain",
    "SampleSet",
    "register_function",
    "get_function",
    "enumerate_monomials",
    "truncate_basis",
    "generate_grid",
    "sample_function",
    "evaluate_basis",
    "parse_basis_spec",
    "parse_domain",
]


class DimensionError(ValueError):
    pass


@dataclass(frozen=True)
class Monomial:
    exponents: tuple[int, ...]

    def __post_init__(self):
        exps = tuple(int(e) for e in self.exponents)
        if not exps:
            raise ValueError("monomial needs at least one exponent")
        if any(e < 0 for e in exps):
            raise ValueError(f"negative exponent in {exps}")
        object.__setattr__(self, "exponents", exps)

    @property
    def dimension(self) -> int:
        return len(self.exponents)

    @property
    def degree(self) -> int:
        return sum(self.exponents)

    @property
    def is_constant(self) -> bool:
        return self.degree == 0

    def __call__(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        exps = np.asarray([self.exponents], dtype=np.int64)
        return kernels.monomial_design(points, exps)[:, 0]

    def label(self) -> str:
        names = _variable_names(self.dimension)
        parts = []
        for name, e in zip(names, self.exponents):
            if e == 1:
                parts.append(name)
            elif e > 1:
                parts.append(f"{name}^{e}")
        return "*".join(parts) if parts else "1"


def _variable_names(l: int) -> list[str]:
    if l == 1:
        return ["x"]
    if l == 2:
        return ["x", "y"]
    return [f"x{i + 1}" for i in range(l)]


# -- function registry ------------------------------------------------------


@dataclass(frozen=True)
class _Registered:
    func: Callable[[np.ndarray], np.ndarray]
    dimension: int | None  # None: any dimension
    is_constant: bool = False


_REGISTRY: dict[str, _Registered] = {}


def register_function(name: str, func, dimension: int | None = None, *, is_constant=False):
    """Register a vectorised scalar function ``func(points (N, l)) -> (N,)``."""
    if name.startswith("constant:"):
        raise ValueError("the 'constant:' prefix is reserved")
    _REGISTRY[name] = _Registered(func, dimension, is_constant)


def get_function(name: str) -> _Registered:
    if name.startswith("constant:"):
        try:
            value = float(name.split(":", 1)[1])
        except ValueError:
            raise KeyError(f"bad constant function {name!r}") from None
        if not math.isfinite(value):
            raise KeyError(f"bad constant function {name!r}")
        return _Registered(lambda p, v=value: np.full(p.shape[0], v), None, True)
    try:
        return _REGISTRY[name]
    except KeyError:
        raise KeyError(f"unregistered function {name!r}; known: {sorted(_REGISTRY)}") from None


register_function("sqrt_abs_sum", lambda p: np.sqrt(np.abs(p[:, 0]) + np.abs(p[:, 1])), 2)
register_function("abs_x", lambda p: np.abs(p[:, 0]), None)
register_function("runge2d", lambda p: 1.0 / (1.0 + p[:, 0] ** 2 + p[:, 1] ** 2), 2)


@dataclass(frozen=True)
class NamedFunction:
    """Basis function looked up in the registry by identifier."""

    name: str
    dimension: int

    def __post_init__(self):
        reg = get_function(self.name)
        if reg.dimension is not None and reg.dimension != self.dimension:
            raise DimensionError(
                f"{self.name!r} is defined for l={reg.dimension}, not l={self.dimension}"
            )

    @property
    def is_constant(self) -> bool:
        return get_function(self.name).is_constant

    def __call__(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        return np.asarray(get_function(self.name).func(points), dtype=float)

    def label(self) -> str:
        return self.name


BasisFunction = Monomial | NamedFunction


@dataclass(frozen=True)
class Basis:
    """Ordered, immutable list of basis functions on R^l.

    Coefficient ``i`` of any fit always multiplies ``functions[i]``.
    """

    dimension: int
    functions: tuple[BasisFunction, ...]

    def __post_init__(self):
        funcs = tuple(self.functions)
        if self.dimension < 1:
            raise ValueError("dimension must be >= 1")
        if not funcs:
            raise ValueError("basis must not be empty")
        for fn in funcs:
            if fn.dimension != self.dimension:
                raise DimensionError(
                    f"basis function {fn.label()} has dimension {fn.dimension}, "
                    f"basis has {self.dimension}"
                )
        object.__setattr__(self, "functions", funcs)

    @classmethod
    def from_exponents(cls, exponents: Iterable[Sequence[int]]) -> "Basis":
        monos = tuple(Monomial(tuple(e)) for e in exponents)
        if not monos:
            raise ValueError("basis must not be empty")
        return cls(monos[0].dimension, monos)

    def __len__(self) -> int:
        return len(self.functions)

    def __getitem__(self, i):
        return self.functions[i]

    def __iter__(self):
        return iter(self.functions)

    def labels(self) -> list[str]:
        return [fn.label() for fn in self.functions]

    def constant_index(self) -> int | None:
        """Index of the first constant basis function, if any."""
        for i, fn in enumerate(self.functions):
            if fn.is_constant:
                return i
        return None

    @property
    def is_monomial(self) -> bool:
        return all(isinstance(fn, Monomial) for fn in self.functions)

    def design_matrix(self, points: np.ndarray) -> np.ndarray:
        """Row ``p`` holds every basis function evaluated at ``points[p]``."""
        points = np.ascontiguousarray(np.atleast_2d(points), dtype=float)
        if points.shape[1] != self.dimension:
            raise DimensionError(
                f"points have dimension {points.shape[1]}, basis has {self.dimension}"
            )
        if self.is_monomial:
            exps = np.array([fn.exponents for fn in self.functions], dtype=np.int64)
            return kernels.monomial_design(points, exps)
        out = np.empty((points.shape[0], len(self)))
        for k, fn in enumerate(self.functions):
            out[:, k] = fn(points)
        return out


def evaluate_basis(basis: Basis, point: Sequence[float]) -> np.ndarray:
    """Vector ``(g_0(x), ..., g_n(x))`` at a single point."""
    x = np.asarray(point, dtype=float).reshape(-1)
    if x.shape[0] != basis.dimension:
        raise DimensionError(f"point has dimension {x.shape[0]}, basis has {basis.dimension}")
    return basis.design_matrix(x[None, :])[0]


# -- monomial enumeration ---------------------------------------------------


def _grlex_block(l: int, degree: int) -> list[tuple[int, ...]]:
    # descending lex inside a degree: x^2, xy, y^2
    block = [e for e in itertools.product(range(degree + 1), repeat=l) if sum(e) == degree]
    return sorted(block, reverse=True)


def _paper2d_block(degree: int) -> list[tuple[int, int]]:
    if degree == 0:
        return [(0, 0)]
    block = [(degree, 0), (0, degree)]
    block += [(i, degree - i) for i in range(degree - 1, 0, -1)]
    return block


def enumerate_monomials(l: int, m: int, ordering: str = "grlex") -> Basis:
    """All monomials in ``l`` variables of total degree ``<= m``.

    ``grlex`` sorts by degree, then descending lexicographic order on the
    exponent vectors. ``paper2d`` (``l == 2`` only) lists each degree as
    pure x-power, pure y-power, then mixed terms by descending x-exponent:
    1, x, y, x^2, y^2, xy, x^3, y^3, x^2y, xy^2, x^4, ...
    """
    if l < 1:
        raise ValueError(f"need l >= 1, got {l}")
    if m < 0:
        raise ValueError(f"need m >= 0, got {m}")
    if ordering == "grlex":
        exps = [e for d in range(m + 1) for e in _grlex_block(l, d)]
    elif ordering == "paper2d":
        if l != 2:
            raise ValueError("paper2d ordering is only defined for l = 2")
        exps = [e for d in range(m + 1) for e in _paper2d_block(d)]
    else:
        raise ValueError(f"unknown ordering {ordering!r}")
    return Basis.from_exponents(exps)


def truncate_basis(basis: Basis, k: int) -> Basis:
    if not 1 <= k <= len(basis):
        raise ValueError(f"truncation length {k} outside 1..{len(basis)}")
    return Basis(basis.dimension, basis.functions[:k])


# -- domain, grid, samples --------------------------------------------------


@dataclass(frozen=True)
class Domain:
    lower: tuple[float, ...]
    upper: tuple[float, ...]

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lower)
        hi = tuple(float(v) for v in self.upper)
        if len(lo) != len(hi) or not lo:
            raise ValueError("lower and upper must have the same non-zero length")
        if any(not a < b for a, b in zip(lo, hi)):
            raise ValueError(f"need lower < upper on every axis, got {lo} / {hi}")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dimension(self) -> int:
        return len(self.lower)

    @classmethod
    def cube(cls, lo: float, hi: float, l: int) -> "Domain":
        return cls((lo,) * l, (hi,) * l)


def parse_domain(text: str) -> Domain:
    """``"-1,1;-1,1"`` -> the box [-1,1]^2."""
    lower, upper = [], []
    for axis in text.split(";"):
        parts = [p for p in axis.split(",")]
        if len(parts) != 2:
            raise ValueError(f"bad axis {axis!r} in domain {text!r}; expected 'lo,hi'")
        lower.append(float(parts[0]))
        upper.append(float(parts[1]))
    return Domain(tuple(lower), tuple(upper))


def _axis(lo: float, hi: float, step: float) -> np.ndarray:
    span = hi - lo
    slack = step * 1e-9
    if step > span + slack:
        raise ValueError(f"step {step} larger than axis length {span}")
    n = int(math.floor(span / step))
    if lo + (n + 1) * step <= hi + slack:
        n += 1
    k = np.arange(n + 1, dtype=float)
    pts = lo + k * step
    if abs(pts[-1] - hi) <= slack:
        pts[-1] = hi
    return pts


def generate_grid(domain: Domain, step: float) -> np.ndarray:
    """Box grid ``lower + k * step`` per axis, as an ``(N, l)`` array.

    Points are indexed by integer counts rather than accumulated, and an
    upper endpoint within ``step * 1e-9`` of a grid value is snapped onto
    it. Rows are in lexicographic order of the axis indices (last axis
    fastest).
    """
    step = float(step)
    if not step > 0:
        raise ValueError(f"step must be positive, got {step}")
    axes = [_axis(lo, hi, step) for lo, hi in zip(domain.lower, domain.upper)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.ascontiguousarray(np.stack([m.ravel() for m in mesh], axis=1))


@dataclass(frozen=True)
class SampleSet:
    points: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        pts = np.ascontiguousarray(np.atleast_2d(np.asarray(self.points, dtype=float)))
        vals = np.ascontiguousarray(np.asarray(self.values, dtype=float).reshape(-1))
        if pts.shape[0] < 1 or pts.shape[0] != vals.shape[0]:
            raise ValueError(f"{pts.shape[0]} points but {vals.shape[0]} values")
        if not np.all(np.isfinite(vals)):
            raise ValueError("sample values must be finite")
        pts.flags.writeable = False
        vals.flags.writeable = False
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "values", vals)

    @property
    def dimension(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.points.shape[0]


def sample_function(name: str, points: np.ndarray) -> SampleSet:
    """Evaluate the registered function ``name`` on ``points``."""
    reg = get_function(name)
    points = np.ascontiguousarray(np.atleast_2d(np.asarray(points, dtype=float)))
    if reg.dimension is not None and points.shape[1] != reg.dimension:
        raise DimensionError(
            f"{name!r} needs l={reg.dimension}, points have l={points.shape[1]}"
        )
    values = np.asarray(reg.func(points), dtype=float)
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        raise ValueError(f"{name!r} is not finite at grid point {points[bad[0]].tolist()}")
    return SampleSet(points, values)


# -- basis spec strings -----------------------------------------------------

_TUPLE = re.compile(r"^\(\s*(\d+(?:\s*,\s*\d+)*)\s*\)$")


def parse_basis_spec(text: str, dimension: int) -> Basis:
    """Parse a basis description.

    Accepted forms::

        grlex:<degree>[:<count>]      all monomials of degree <= degree
        paper2d:<degree>[:<count>]    same, in the paper2d ordering
        (0,0);(1,0);(0,1);abs_x       explicit list of exponent tuples
                                      and/or registered function names
    """
    text = text.strip()
    head = text.split(":", 1)[0]
    if head in ("grlex", "paper2d"):
        parts = text.split(":")
        if len(parts) not in (2, 3):
            raise ValueError(f"bad basis spec {text!r}")
        basis = enumerate_monomials(dimension, int(parts[1]), head)
        if len(parts) == 3:
            basis = truncate_basis(basis, int(parts[2]))
        return basis
    funcs: list[BasisFunction] = []
    for item in text.split(";"):
        item = item.strip()
        if not item:
            continue
        match = _TUPLE.match(item)
        if match:
            funcs.append(Monomial(tuple(int(v) for v in match.group(1).split(","))))
        else:
            funcs.append(NamedFunction(item, dimension))
    if not funcs:
        raise ValueError(f"empty basis spec {text!r}")
    return Basis(dimension, tuple(funcs))


def format_basis_spec(basis: Basis) -> str:
    """Inverse of the explicit-list form of :func:`parse_basis_spec`."""
    items = []
    for fn in basis:
        if isinstance(fn, Monomial):
            items.append("(" + ",".join(str(e) for e in fn.exponents) + ")")
        else:
            items.append(fn.name)
    return ";".join(items)
