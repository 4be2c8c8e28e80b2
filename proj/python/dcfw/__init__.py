"""Frank-Wolfe solvers over difference-of-convex level sets."""

from ._dcfw import (
    DimensionMismatch,
    Error,
    ParseError,
    PreconditionViolation,
    constraint_value,
    gen_synthetic_mc,
    kkt_check_elementwise,
    lo_elementwise,
    lo_group,
    lo_nuclear,
    lo_strongly_convex,
    run_experiment,
    solve_least_squares,
    solve_matrix_completion,
)

__all__ = [
    "DimensionMismatch",
    "Error",
    "ParseError",
    "PreconditionViolation",
    "constraint_value",
    "gen_synthetic_mc",
    "kkt_check_elementwise",
    "lo_elementwise",
    "lo_group",
    "lo_nuclear",
    "lo_strongly_convex",
    "run_experiment",
    "solve_least_squares",
    "solve_matrix_completion",
]
