"""Best uniform (Chebyshev) approximation of multivariate functions on finite grids.

Polynomials and other linear forms are fitted with a single LP; generalised
rational functions ``P/Q`` by bisection on the error level with one
feasibility problem per step.
"""

from .basis import (
    Basis,
    Domain,
    Monomial,
    NamedFunction,
    SampleSet,
    enumerate_monomials,
    evaluate_basis,
    generate_grid,
    parse_basis_spec,
    register_function,
    sample_function,
    truncate_basis,
)
from .lp import LinearProgram, LpSolution, LpStatus, LpTolerances, solve, verify_solution
from .poly import PolyFit, assemble_minimax_lp, evaluate_polynomial, fit_polynomial, residual_surface
from .rational import (
    BisectionConfig,
    FeasibilityVerdict,
    RationalFit,
    RationalModel,
    assemble_feasibility_lp,
    check_feasibility,
    evaluate_rational,
    fit_rational,
    initial_bracket,
)

__version__ = "0.1.0"

__all__ = [
    "Basis", "Domain", "Monomial", "NamedFunction", "SampleSet", "enumerate_monomials",
    "evaluate_basis", "generate_grid", "parse_basis_spec", "register_function",
    "sample_function", "truncate_basis",
    "LinearProgram", "LpSolution", "LpStatus", "LpTolerances", "solve", "verify_solution",
    "PolyFit", "assemble_minimax_lp", "evaluate_polynomial", "fit_polynomial", "residual_surface",
    "BisectionConfig", "FeasibilityVerdict", "RationalFit", "RationalModel",
    "assemble_feasibility_lp", "check_feasibility", "evaluate_rational", "fit_rational",
    "initial_bracket",
]
