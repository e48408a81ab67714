"""Soft-classification Bayesian sequential testing of a Brownian drift."""
from .analysis import ProblemParams, UBoundaries, h, h1, h2, psi, psi1, psi2, u_boundaries
from .penalty import (
    PenaltySpec,
    apply_generator,
    make_classic,
    make_cross_entropy,
    make_l1,
    make_l2,
    make_penalty,
    parse_penalty,
    validate_assumptions,
)
from .solver import (
    BoundarySolution,
    Decision,
    Kind,
    ValueFunction,
    optimal_stop_decision,
    solve,
    solve_penalty,
    value_at,
    value_function,
)

__version__ = "0.1.0"
