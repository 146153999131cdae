"""Projected gradient of the diagonal objective on O(n) x O(n) x O(n).

With ``S`` the current core tensor, the gradient block for factor ``Q`` is
``Q @ Lam(Q)`` where ``Lam(Q)`` is skew-symmetric.  All three blocks are read
off ``S`` entrywise::

    Lam(U)[l, p] = S_ppp * S_lpp - S_lll * S_pll
    Lam(V)[l, p] = S_ppp * S_plp - S_lll * S_lpl
    Lam(W)[l, p] = S_ppp * S_ppl - S_lll * S_llp

Rotating factor ``Q`` by ``R(i, j, phi)`` changes the objective at rate
``-2 * Lam(Q)[i, j]`` at ``phi = 0``.
"""
import math
from enum import Enum

import numpy as np
from scipy.linalg.blas import dnrm2, dsyrk
from scipy.linalg.lapack import dsyevr

from .errors import ConfigError, ModeError, NumericError
from .tensor import diag, diag_sq_sum

__all__ = [
    "NormKind",
    "SPECTRAL_EXACT_MAX_N",
    "lambda_of",
    "lambda_triple",
    "spectral_norm",
    "frobenius_norm",
    "skew_norm",
    "grad_norms",
    "pivot_admissible",
    "objective_f",
]

# above this size the spectral norm comes from power iteration
SPECTRAL_EXACT_MAX_N = 512


class NormKind(Enum):
    SPECTRAL = "spectral"
    FROBENIUS = "frobenius"


def _mixed_entries(core, m):
    """``M[l, p]`` = core entry with index ``l`` in mode ``m`` and ``p`` elsewhere."""
    r = np.arange(core.shape[0])
    if m == 1:
        return core[:, r, r]
    if m == 2:
        return core[r, :, r].T
    if m == 3:
        return core[r, r, :].T
    raise ModeError(f"mode must be 1, 2 or 3, got {m!r}")


def lambda_of(core, m):
    """Skew-symmetric block ``Lam(Q)`` for mode ``m``, O(n^2).

    ``K - K.T`` with ``K[l, p] = S_ppp * M[l, p]`` is skew-symmetric bit for
    bit, zero diagonal included.
    """
    k = _mixed_entries(core, m) * diag(core)[None, :]
    return k - k.T


def lambda_triple(core):
    return tuple(lambda_of(core, m) for m in (1, 2, 3))


def _power_spectral(lam, tol=1e-10, max_iter=10_000):
    gram = lam.T @ lam
    v = np.ones(lam.shape[0])
    v /= np.linalg.norm(v)
    est = 0.0
    for _ in range(max_iter):
        w = gram @ v
        new = float(v @ w)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        v = w / nw
        if abs(new - est) <= tol * abs(new):
            est = new
            break
        est = new
    return float(np.sqrt(max(est, 0.0)))


def spectral_norm(lam):
    """Largest singular value of a skew-symmetric matrix.

    Exact symmetric eigen-solve of ``-lam @ lam = lam.T @ lam`` (BLAS
    ``dsyrk``, then LAPACK ``dsyevr`` for the top eigenvalue only) up to
    :data:`SPECTRAL_EXACT_MAX_N`; power iteration from the all-ones vector
    beyond.
    """
    n = lam.shape[0]
    if not np.any(lam):
        return 0.0
    if n > SPECTRAL_EXACT_MAX_N:
        return _power_spectral(lam)
    # same BLAS/LAPACK calls and workspace sizes as the compiled kernel
    gram = dsyrk(1.0, np.asfortranarray(lam), trans=1, lower=0)
    w, _, _, _, info = dsyevr(gram, compute_v=0, range="I", lower=0, il=n, iu=n,
                              lwork=26 * n + 64, liwork=10 * n + 64)
    if info != 0:
        raise NumericError(f"dsyevr failed with info={info}")
    top = float(w[0])
    return math.sqrt(top) if top > 0.0 else 0.0


def frobenius_norm(lam):
    # BLAS dnrm2, as in the compiled kernel
    return float(dnrm2(np.ravel(lam, order="F")))


def skew_norm(lam, norm_kind=NormKind.SPECTRAL):
    if NormKind(norm_kind) is NormKind.SPECTRAL:
        return spectral_norm(lam)
    return frobenius_norm(lam)


def grad_norms(core, norm_kind=NormKind.SPECTRAL):
    """Norms ``(gu, gv, gw)`` of the three gradient blocks."""
    return tuple(skew_norm(lambda_of(core, m), norm_kind) for m in (1, 2, 3))


def _admissible(lam, i, j, eta, lam_norm):
    return lam_norm > 0.0 and 2.0 * abs(lam[i, j]) >= eta * lam_norm


def pivot_admissible(core, m, i, j, eta, norm_kind=NormKind.SPECTRAL):
    """Pivot condition ``2 |Lam(Q)[i, j]| >= eta * ||Lam(Q)||`` on the current core.

    Always false when ``Lam(Q)`` vanishes.  ``eta`` must lie in ``(0, 2/n]``.
    """
    n = core.shape[0]
    if not (0.0 < eta <= 2.0 / n):
        raise ConfigError(f"eta must satisfy 0 < eta <= 2/n = {2.0 / n!r}, got {eta!r}")
    lam = lambda_of(core, m)
    return _admissible(lam, i, j, eta, skew_norm(lam, norm_kind))


def objective_f(core):
    return diag_sq_sum(core)
