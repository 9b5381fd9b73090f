"""
Linear-algebra kernels and random-variate samplers
"""

from .linalg import (
    ConditionalParameters,
    SymMatrix,
    cholesky,
    conditional_from_sweep,
    ensure_symmetric,
    sweep,
)
from .sampling import RngStream, draw_mvn, draw_mvn_rows, draw_scaled_inv_chisq

__all__ = [
    "ConditionalParameters",
    "SymMatrix",
    "cholesky",
    "conditional_from_sweep",
    "ensure_symmetric",
    "sweep",
    "RngStream",
    "draw_mvn",
    "draw_mvn_rows",
    "draw_scaled_inv_chisq",
]
