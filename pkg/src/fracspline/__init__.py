"""fracspline: collocation solver for linear fractional dynamical systems.

Solves D^g X(t) = A X(t) + F(t), X(0) = X0, 0 < g <= 1, by least-squares
collocation in dyadically refined cardinal B-spline spaces, using exact
closed forms for the Caputo derivatives of the basis.
"""

from .analysis import (
    ConvergenceReport,
    ErrorReport,
    estimate_order,
    example1_problem,
    example2_problem,
    linf_error,
    run_example1,
    run_example2,
    stability_check,
)
from .bspline import (
    ActiveBasis,
    BasisIndex,
    active_basis,
    basis_eval,
    bspline_derivative,
    bspline_eval,
    refinement_mask,
    truncated_power,
)
from .caputo import (
    EdgeExpansion,
    caputo_basis,
    caputo_edge,
    caputo_interior,
    caputo_of_power,
    caputo_quadrature,
)
from .config import RunConfig, dump_config, parse_config, parse_config_file
from .errors import ConfigError, NumericsError
from .mittag_leffler import MLParams, SystemMatrix, ml_matrix, ml_scalar, reference_solution
from .solver import (
    CollocationConfig,
    CollocationMatrices,
    ForcingTerm,
    FractionalProblem,
    SplineSolution,
    assemble,
    collocation_grid,
    collocation_residual,
    evaluate_solution,
    make_forcing,
    sample_solution,
    solve,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # basis
    "ActiveBasis",
    "BasisIndex",
    "active_basis",
    "basis_eval",
    "bspline_derivative",
    "bspline_eval",
    "refinement_mask",
    "truncated_power",
    # fractional derivatives
    "EdgeExpansion",
    "caputo_basis",
    "caputo_edge",
    "caputo_interior",
    "caputo_of_power",
    "caputo_quadrature",
    # Mittag-Leffler
    "MLParams",
    "SystemMatrix",
    "ml_matrix",
    "ml_scalar",
    "reference_solution",
    # collocation
    "CollocationConfig",
    "CollocationMatrices",
    "ForcingTerm",
    "FractionalProblem",
    "SplineSolution",
    "assemble",
    "collocation_grid",
    "collocation_residual",
    "evaluate_solution",
    "make_forcing",
    "sample_solution",
    "solve",
    # analysis
    "ConvergenceReport",
    "ErrorReport",
    "estimate_order",
    "example1_problem",
    "example2_problem",
    "linf_error",
    "run_example1",
    "run_example2",
    "stability_check",
    # configuration
    "RunConfig",
    "dump_config",
    "parse_config",
    "parse_config_file",
    "ConfigError",
    "NumericsError",
]
