"""Ultraweak DPG and DPG least-squares solvers for A : D^2 u = f under the Cordes condition."""

from ._core import (
    CordesViolation,
    FieldErrors,
    Indicators,
    InvariantViolation,
    Mesh,
    Method,
    Problem,
    Refinement,
    Solution,
    TrialKind,
    cordes_epsilon,
    doerfler_mark,
    estimate,
    field_errors,
    initial_square_mesh,
    problem,
    refine_nvb,
    run_convergence,
    run_study,
    solve,
    uniform_refine,
)

__all__ = [
    "CordesViolation",
    "FieldErrors",
    "Indicators",
    "InvariantViolation",
    "Mesh",
    "Method",
    "Problem",
    "Refinement",
    "Solution",
    "TrialKind",
    "cordes_epsilon",
    "doerfler_mark",
    "estimate",
    "field_errors",
    "initial_square_mesh",
    "problem",
    "refine_nvb",
    "run_convergence",
    "run_study",
    "solve",
    "uniform_refine",
]
