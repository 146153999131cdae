"""Jacobi-type approximate orthogonal diagonalization of third-order tensors."""
from .driver import (
    Diagnostics, FactorTriple, InitKind, RunConfig, RunResult, Status, TraceMode,
    TraceRecord, align_signs, diagnostics, hosvd_factors, initialize, low_rank,
    reconstruct, run,
)
from .errors import (
    ConfigError, ModeError, NumericError, OTDError, ParseError, PivotError,
    RotationError, ShapeError,
)
from .gradient import NormKind, grad_norms, lambda_of, objective_f, pivot_admissible
from .kernels import BACKEND
from .pivots import Ordering, cycle
from .rotation import AngleSolution, AngleStatus, solve_mode_angle, tangent_roots

__version__ = "0.1.0"
