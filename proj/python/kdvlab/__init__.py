"""Small-dispersion KdV and Camassa-Holm near the gradient catastrophe."""

from ._core import (
    BreakupPoint,
    DomainError,
    Error,
    InitialData,
    asymptotic_u,
    breakup_point,
    ch_solve,
    finite_gap_eval,
    hopf_evaluate,
    kdv_solve,
    laurent_coefficients,
    local_cubic,
    multiscale_u,
    pi2_solve,
    run_experiment,
    whitham_edges,
)

__all__ = [
    "BreakupPoint",
    "DomainError",
    "Error",
    "InitialData",
    "asymptotic_u",
    "breakup_point",
    "ch_solve",
    "finite_gap_eval",
    "hopf_evaluate",
    "kdv_solve",
    "laurent_coefficients",
    "local_cubic",
    "multiscale_u",
    "pi2_solve",
    "run_experiment",
    "whitham_edges",
]
