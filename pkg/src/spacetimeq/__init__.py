"""Numerical laboratory for quantum correlations in space and time.

Dense simulators for spacetime quantum states built from measurement
correlations (pseudo-density matrices and their continuous-variable
cousins), quantum channels and their Choi matrices, process matrices
with indefinite causal order, decoherence functionals, out-of-time-order
correlators, and time-crystal correlation dynamics.
"""

from spacetimeq import (
    channels,
    cv_wigner,
    gaussian,
    histories,
    linalg,
    otoc,
    pdm,
    process_matrix,
    timecrystal,
)

__all__ = [
    "channels",
    "cv_wigner",
    "gaussian",
    "histories",
    "linalg",
    "otoc",
    "pdm",
    "process_matrix",
    "timecrystal",
]

__version__ = "0.1.0"
