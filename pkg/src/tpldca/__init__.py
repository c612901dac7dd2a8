"""Terminating inexact proximal linearized DC algorithms for ``f = g - h``
with ``g`` a maximum of smooth convex pieces."""

from .core import (
    ConvexOracle,
    DcError,
    DcProblem,
    DimensionError,
    GSplit,
    MaxSmoothFunction,
    OracleFault,
    SmoothConvexPiece,
    dc_value,
    registry_get,
    registry_names,
)
from .counterexamples import ApSolutionSet, NonTerminationReport, ap_solution_set_abs, run_example_32
from .dca import (
    ConstantZeta,
    InverseSquare,
    IterateRecord,
    SolverConfig,
    SolveTrace,
    criticality_residual,
    descent_gap,
    select_u,
    souza_descent_gap,
    souza_solve,
    strict_gap,
    tpldca_solve,
)
from .inner import (
    Subproblem,
    build_subproblem,
    halving_solver,
    ista_solver,
    scripted_solver,
    subgradient_solver,
)
from .subdiff import (
    Interval,
    Polytope,
    abs_eps_distance,
    abs_eps_subdiff,
    active_set,
    check_eps_subgradient,
    dist_to_strict_subdiff,
    min_norm_point,
    strict_subdiff,
)

__version__ = "0.1.0"
