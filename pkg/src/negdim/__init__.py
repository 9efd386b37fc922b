"""Bose-Einstein occupancy statistics for real lattice dimension.

Library surface: generalized multiplicity weights (`weights`), occupancy
and constraint solvers over a level spectrum (`bose_model`), exact
counting / uniform sampling of constrained occupancy vectors and the
concentration experiments built on them (`compositions`,
`concentration`), corpus frequency statistics (`corpus`), and the
rank-curve calibration pipeline (`fitting`).  The `negdim` console
script wires these into reproducible file-emitting runs.
"""

__version__ = "0.1.0"

from .errors import (
    BudgetExceededError,
    CalibrationError,
    ConvergenceError,
    DomainError,
    NegdimError,
    ValidationError,
)

__all__ = [
    "__version__",
    "NegdimError",
    "DomainError",
    "ValidationError",
    "ConvergenceError",
    "CalibrationError",
    "BudgetExceededError",
]
