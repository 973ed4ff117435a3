from .decay import TARGETS, DecayTable, best_error, classify, error_decay, targets_for
from .linalg import SolverError, weighted_lstsq
from .solvers import (
    Expansion,
    GramError,
    ProjectionReport,
    gram_matrix,
    project_l2,
    project_lp,
    project_sup,
)
from .witness import DensityVerdict, DualError, DualFunctional, annihilator_witness, apply_dual

__all__ = [
    "TARGETS",
    "DecayTable",
    "DensityVerdict",
    "DualError",
    "DualFunctional",
    "Expansion",
    "GramError",
    "ProjectionReport",
    "SolverError",
    "annihilator_witness",
    "apply_dual",
    "best_error",
    "classify",
    "error_decay",
    "gram_matrix",
    "project_l2",
    "project_lp",
    "project_sup",
    "targets_for",
    "weighted_lstsq",
]
