"""Jacobi-type block coordinate ascent for approximate orthogonal diagonalization.

Finds orthogonal ``U, V, W`` with ``A = S x1 U x2 V x3 W`` and the diagonal
energy ``sum_i S_iii**2`` locally maximal.  Each pivot pair ``(i, j)`` of a
cyclic ordering triggers three microiterations, one per mode, each rotating a
single factor while the other two stay fixed.
"""
import dataclasses
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from . import _pykernels
from .errors import ConfigError, NumericError, ShapeError
from .gradient import NormKind, grad_norms
from .kernels import get_backend
from .pivots import Ordering, as_pair_array, check_cycle, cycle
from .tensor import (
    as_tensor3, asymmetry, diag, diag_sq_sum, matricize, mode_product, norm, off_norm,
    random_orthogonal,
)

log = logging.getLogger(__name__)

__all__ = [
    "InitKind",
    "TraceMode",
    "Status",
    "RunConfig",
    "FactorTriple",
    "TraceRecord",
    "RunResult",
    "Diagnostics",
    "jacobi_eigh",
    "hosvd_factors",
    "initialize",
    "reconstruct",
    "align_signs",
    "run",
    "low_rank",
    "diagnostics",
]

_REORTH_DRIFT = 1e-9
_ABORT_RESIDUAL = 1e-8


class InitKind(Enum):
    IDENTITY = "identity"
    HOSVD = "hosvd"
    RANDOM_PRECOND = "random-precond"


class TraceMode(Enum):
    MICROITERATION = "micro"
    SWEEP = "sweep"


class Status(Enum):
    CONVERGED_GRAD = "converged-grad"
    CONVERGED_STAGNATION = "converged-stagnation"
    MAX_SWEEPS = "max-sweeps"
    ALL_DEGENERATE = "all-degenerate"


@dataclass
class RunConfig:
    """Solver parameters.

    ``eta=None`` means the loosest admissible value ``2/n``.  ``pairs``, when
    given, is a custom cyclic ordering (0-based pairs) that overrides
    ``ordering``.  ``align_signs`` fixes the column-sign freedom of the
    returned factors: columns of ``V`` and ``W`` are flipped to agree with
    those of ``U`` and the core compensates, leaving the decomposition, ``f``
    and every trace value unchanged.
    """

    eta: Optional[float] = None
    ordering: Ordering = Ordering.ROW
    pairs: Optional[Sequence[Tuple[int, int]]] = None
    init: InitKind = InitKind.IDENTITY
    precond_seed: int = 0
    norm_kind: NormKind = NormKind.SPECTRAL
    tol_grad: float = 1e-8
    tol_f: float = 1e-12
    max_sweeps: int = 200
    degenerate_eps: float = 0.0
    trace_every: TraceMode = TraceMode.SWEEP
    backend: Optional[str] = None
    align_signs: bool = True

    def resolved_eta(self, n):
        eta = 2.0 / n if self.eta is None else float(self.eta)
        if not (0.0 < eta <= 2.0 / n * (1 + 1e-15)):
            raise ConfigError(
                f"eta must satisfy 0 < eta <= 2/n = {2.0 / n:.17g} for n={n}, got {eta!r}")
        return min(eta, 2.0 / n)

    def validate(self, n):
        eta = self.resolved_eta(n)
        if not (self.tol_grad > 0 and self.tol_f > 0):
            raise ConfigError("tolerances must be positive")
        if int(self.max_sweeps) != self.max_sweeps or self.max_sweeps < 1:
            raise ConfigError(f"max_sweeps must be an integer >= 1, got {self.max_sweeps!r}")
        if self.degenerate_eps < 0:
            raise ConfigError("degenerate_eps must be >= 0")
        return eta


class FactorTriple(NamedTuple):
    u: np.ndarray
    v: np.ndarray
    w: np.ndarray


class TraceRecord(NamedTuple):
    """One trace row.

    Microiteration rows carry the 0-based pivot and the mode (1..3); the row
    closing each sweep has ``i = j = mode = None``.
    """

    sweep: int
    step: int
    i: Optional[int]
    j: Optional[int]
    mode: Optional[int]
    angle: float
    f: float
    off_rel: float
    grad_norm: float
    skipped: bool
    degenerate: bool


@dataclass
class RunResult:
    core: np.ndarray
    factors: FactorTriple
    f_final: float
    off_rel_final: float
    sweeps_used: int
    status: Status
    trace: List[TraceRecord] = field(default_factory=list)
    n_rotations: int = 0
    # smallest change of f over a single microiteration (>= 0 up to rounding)
    min_step_gain: float = 0.0
    recommend_precond: bool = False
    norm_a: float = 0.0
    # largest |incremental f - recomputed f| seen at a sweep end
    max_f_drift: float = 0.0


def jacobi_eigh(g, tol=1e-13, max_sweeps=60):
    """Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns ``(w, q)`` with eigenvalues in descending order and the
    largest-magnitude component of each eigenvector made positive.  Stops
    when ``off(G) <= tol * ||G||_F``; raises :class:`NumericError` if that does
    not happen within ``max_sweeps``.
    """
    a = np.array(g, dtype=np.float64)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ShapeError(f"expected a square matrix, got {a.shape}")
    q = np.eye(n)
    scale = np.linalg.norm(a)

    def off(x):
        return float(np.linalg.norm(x - np.diag(np.diag(x))))

    for _ in range(max_sweeps + 1):
        if off(a) <= tol * scale:
            break
        for p in range(n - 1):
            for r in range(p + 1, n):
                apr = a[p, r]
                if apr == 0.0:
                    continue
                theta = (a[r, r] - a[p, p]) / (2.0 * apr)
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                ap = a[:, p].copy()
                a[:, p] = c * ap - s * a[:, r]
                a[:, r] = s * ap + c * a[:, r]
                ap = a[p, :].copy()
                a[p, :] = c * ap - s * a[r, :]
                a[r, :] = s * ap + c * a[r, :]
                qp = q[:, p].copy()
                q[:, p] = c * qp - s * q[:, r]
                q[:, r] = s * qp + c * q[:, r]
    else:
        raise NumericError(
            f"Jacobi eigen-iteration did not converge in {max_sweeps} sweeps "
            f"(off = {off(a):.3e}, ||G|| = {scale:.3e})")
    w = np.diag(a).copy()
    order = np.argsort(-w, kind="stable")
    w = w[order]
    q = q[:, order]
    lead = np.argmax(np.abs(q), axis=0)
    q *= np.where(q[lead, np.arange(n)] < 0, -1.0, 1.0)[None, :]
    return w, q


def hosvd_factors(a):
    """Left singular vectors of the three unfoldings (eigenvectors of their Gram matrices)."""
    mats = []
    for m in (1, 2, 3):
        x = matricize(a, m)
        mats.append(jacobi_eigh(x @ x.T)[1])
    return FactorTriple(*mats)


def _transform(a, mats, transpose):
    t = a
    for m, q in zip((1, 2, 3), mats):
        t = mode_product(t, m, q.T if transpose else q)
    return t


def reconstruct(core, factors):
    """``core x1 U x2 V x3 W``."""
    return _transform(core, factors, transpose=False)


def initialize(a, init=InitKind.IDENTITY, precond_seed=0):
    """Starting core and factors; ``a = core x1 U x2 V x3 W`` holds in every case."""
    a = as_tensor3(a)
    n = a.shape[0]
    init = InitKind(init)
    if init is InitKind.IDENTITY:
        return a.copy(order="F"), FactorTriple(np.eye(n), np.eye(n), np.eye(n))
    if init is InitKind.HOSVD:
        factors = hosvd_factors(a)
        return np.asfortranarray(_transform(a, factors, transpose=True)), factors
    q = random_orthogonal(n, np.random.default_rng(precond_seed))
    core = _transform(a, (q, q, q), transpose=False)
    return np.asfortranarray(core), FactorTriple(q.T.copy(), q.T.copy(), q.T.copy())


def _orth_drift(q):
    return float(np.max(np.abs(q.T @ q - np.eye(q.shape[0]))))


def _reorthonormalize(q):
    qq, r = np.linalg.qr(q)
    return qq * np.where(np.diag(r) < 0, -1.0, 1.0)[None, :]


def _grad_total(core, norm_kind):
    return math.sqrt(sum(g * g for g in grad_norms(core, norm_kind)))


def _column_signs(q, ref):
    return np.where(np.sum(q * ref, axis=0) < 0, -1.0, 1.0)


def align_signs(core, factors):
    """Flip columns of ``V`` and ``W`` towards ``U``; returns new ``(core, factors)``.

    ``R(i, j, phi + pi) = -R(i, j, phi)`` gives the same pair objective, so
    each factor is only determined up to column signs.  Fixing the gauge makes
    factors that agree up to sign compare equal.
    """
    u, v, w = factors
    dv = _column_signs(v, u)
    dw = _column_signs(w, u)
    core = np.asfortranarray(core * dv[None, :, None] * dw[None, None, :])
    return core, FactorTriple(np.asfortranarray(u), np.asfortranarray(v * dv),
                              np.asfortranarray(w * dw))


def run(a, cfg=None):
    """Run the Jacobi-type solver on ``a``.

    Sweeps repeat until one of: the gradient norm drops to
    ``tol_grad * ||a||^2``; ``f`` gains at most ``tol_f * ||a||^2`` over a
    sweep; a sweep applies no rotation while the diagonal is identically zero
    (all-degenerate start, retry with random preconditioning); or
    ``max_sweeps`` is reached.
    """
    cfg = RunConfig() if cfg is None else cfg
    a = as_tensor3(a)
    n = a.shape[0]
    eta = cfg.validate(n)
    norm_kind = NormKind(cfg.norm_kind)
    trace_mode = TraceMode(cfg.trace_every)
    if cfg.pairs is not None:
        pair_list = check_cycle(cfg.pairs, n)
    else:
        pair_list = cycle(cfg.ordering, n)
    pairs = as_pair_array(pair_list)
    kern = get_backend(cfg.backend)

    core, factors = initialize(a, cfg.init, cfg.precond_seed)
    factors = [np.array(q, dtype=np.float64, order="F") for q in factors]
    norm_a = norm(a)
    norm2 = norm_a * norm_a

    def off_rel(f):
        return math.sqrt(max(norm2 - f, 0.0)) / norm_a if norm_a > 0 else 0.0

    f = diag_sq_sum(core)
    trace = []
    n_rot_total = 0
    min_gain = math.inf
    status = Status.MAX_SWEEPS
    sweeps = 0
    max_drift = 0.0
    nsteps = 3 * len(pair_list)
    logbuf = np.empty((nsteps, _pykernels.LOG_WIDTH))
    record_micro = trace_mode is TraceMode.MICROITERATION

    for sweep in range(1, int(cfg.max_sweeps) + 1):
        sweeps = sweep
        f_start = f
        f_inc, n_rot, _ = kern.sweep(core, factors, pairs, eta,
                                     norm_kind is NormKind.SPECTRAL,
                                     float(cfg.degenerate_eps), f, logbuf, record_micro)
        n_rot_total += n_rot
        fs = logbuf[:, _pykernels.F]
        if nsteps:
            min_gain = min(min_gain, float(np.min(np.diff(fs, prepend=f_start))))
        if record_micro:
            for step in range(nsteps):
                p, q = pair_list[step // 3]
                row = logbuf[step]
                trace.append(TraceRecord(
                    sweep, step + 1, p, q, step % 3 + 1, float(row[_pykernels.ANGLE]),
                    float(row[_pykernels.F]), off_rel(float(row[_pykernels.F])),
                    float(row[_pykernels.GRAD]), bool(row[_pykernels.SKIPPED]),
                    bool(row[_pykernels.DEGENERATE])))

        f = diag_sq_sum(core)
        max_drift = max(max_drift, abs(f - f_inc))

        for m, q in enumerate(factors):
            drift = _orth_drift(q)
            if drift > _REORTH_DRIFT:
                log.warning("re-orthonormalizing factor %d (drift %.3e)", m + 1, drift)
                factors[m] = np.asfortranarray(_reorthonormalize(q))
                core = np.asfortranarray(_transform(a, factors, transpose=True))
        resid = norm(a - reconstruct(core, factors))
        if resid > _ABORT_RESIDUAL * max(norm_a, 1e-300):
            raise NumericError(
                f"reconstruction residual {resid:.3e} exceeds {_ABORT_RESIDUAL:g}*||a|| "
                f"after sweep {sweep}")

        g = _grad_total(core, norm_kind)
        off_direct = off_norm(core) / norm_a if norm_a > 0 else 0.0
        trace.append(TraceRecord(sweep, nsteps, None, None, None, 0.0, f, off_direct, g,
                                 n_rot == 0,
                                 bool(np.any(logbuf[:, _pykernels.DEGENERATE] > 0))))

        if n_rot == 0 and norm2 > 0 and f <= cfg.degenerate_eps * norm2:
            status = Status.ALL_DEGENERATE
            break
        if g <= cfg.tol_grad * norm2:
            status = Status.CONVERGED_GRAD
            break
        if f - f_start <= cfg.tol_f * norm2:
            status = Status.CONVERGED_STAGNATION
            break

    factors = FactorTriple(*factors)
    if cfg.align_signs:
        core, factors = align_signs(core, factors)
    return RunResult(
        core=core,
        factors=factors,
        f_final=f,
        off_rel_final=off_norm(core) / norm_a if norm_a > 0 else 0.0,
        sweeps_used=sweeps,
        status=status,
        trace=trace,
        n_rotations=n_rot_total,
        min_step_gain=0.0 if min_gain is math.inf else min_gain,
        recommend_precond=status is Status.ALL_DEGENERATE,
        norm_a=norm_a,
        max_f_drift=max_drift,
    )


def low_rank(result, r, a=None):
    """Rank-``r`` approximation from the ``r`` largest-magnitude diagonal entries of the core.

    Returns ``(approx, err)`` with ``err = ||a - approx||``; ``a`` defaults to
    the reconstruction of ``result``.
    """
    core = result.core
    n = core.shape[0]
    if int(r) != r or not (1 <= r <= n):
        raise ValueError(f"rank must be an integer in [1, {n}], got {r!r}")
    r = int(r)
    d = diag(core)
    sel = np.argsort(-np.abs(d), kind="stable")[:r]
    u, v, w = (q[:, sel] for q in result.factors)
    approx = np.asfortranarray(np.einsum("l,il,jl,kl->ijk", d[sel], u, v, w))
    if a is None:
        a = reconstruct(core, result.factors)
    return approx, norm(np.asarray(a) - approx)


@dataclass
class Diagnostics:
    n: int
    norm_a: float
    f: float
    off_rel: float
    asymmetry: float
    factor_distances: Tuple[float, float, float]
    residual: float
    orthogonality: Tuple[float, float, float]
    grad_norms: Tuple[float, float, float]

    def as_dict(self):
        return dataclasses.asdict(self)


def diagnostics(a, result, norm_kind=NormKind.SPECTRAL):
    """Recompute quality measures of ``result`` directly from ``a``."""
    a = as_tensor3(a)
    core = result.core
    u, v, w = result.factors
    f = diag_sq_sum(core)
    norm_a = norm(a)
    return Diagnostics(
        n=a.shape[0],
        norm_a=norm_a,
        f=f,
        off_rel=off_norm(core) / norm_a if norm_a > 0 else 0.0,
        asymmetry=asymmetry(core),
        factor_distances=(float(np.linalg.norm(u - v)), float(np.linalg.norm(u - w)),
                          float(np.linalg.norm(v - w))),
        residual=norm(a - reconstruct(core, result.factors)),
        orthogonality=tuple(_orth_drift(q) for q in (u, v, w)),
        grad_norms=grad_norms(core, norm_kind),
    )
