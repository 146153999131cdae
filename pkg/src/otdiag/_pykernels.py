"""Pure-Python/numpy sweep kernel; the fallback when the compiled one is absent.

Must stay behaviorally identical to ``_ckernels.pyx``.
"""
import math

import numpy as np

from .gradient import frobenius_norm, lambda_of, spectral_norm
from .rotation import solve_coefficients

# log columns
ANGLE, F, GRAD, SKIPPED, DEGENERATE = range(5)
LOG_WIDTH = 5

_UPPER_SLACK = 1.0 + 1e-12
_LOWER_SLACK = 1.0 - 1e-12


def _cos_minus_one(c, s):
    # c - 1 without cancellation; c rounds to 1 for tiny angles, which
    # would inflate every rotated slice by s**2
    return -(s * s) / (1.0 + c)


def rotate_slices(t, m, i, j, c, s):
    d = _cos_minus_one(c, s)
    if m == 1:
        xi = t[i].copy()
        t[i] = xi + (d * xi + s * t[j])
        t[j] = t[j] + (d * t[j] - s * xi)
    elif m == 2:
        xi = t[:, i].copy()
        t[:, i] = xi + (d * xi + s * t[:, j])
        t[:, j] = t[:, j] + (d * t[:, j] - s * xi)
    else:
        xi = t[:, :, i].copy()
        t[:, :, i] = xi + (d * xi + s * t[:, :, j])
        t[:, :, j] = t[:, :, j] + (d * t[:, :, j] - s * xi)


def rotate_columns(q, i, j, c, s):
    """``q <- q @ R(i, j, phi)``."""
    d = _cos_minus_one(c, s)
    qi = q[:, i].copy()
    q[:, i] = qi + (d * qi + s * q[:, j])
    q[:, j] = q[:, j] + (d * q[:, j] - s * qi)


def _coefficients(t, m, p, q):
    if m == 1:
        return t[p, p, p], t[q, p, p], t[p, q, q], t[q, q, q]
    if m == 2:
        return t[p, p, p], t[p, q, p], t[q, p, q], t[q, q, q]
    return t[p, p, p], t[p, p, q], t[q, q, p], t[q, q, q]


def _sub_sq_norm(t, p, q):
    s = t[np.ix_((p, q), (p, q), (p, q))]
    return float(np.sum(s * s))


def sweep(core, factors, pairs, eta, spectral, degenerate_eps, f, log, record_grad):
    """One cycle of microiterations, updating ``core`` and ``factors`` in place.

    Parameters
    ----------
    core : ndarray, shape (n, n, n)
    factors : sequence of three (n, n) ndarrays
    pairs : ndarray of int, shape (P, 2)
        0-based pivot pairs in visiting order.
    eta : float
        Pivot-condition constant.
    spectral : bool
        Spectral (True) or Frobenius norm of the gradient blocks.
    degenerate_eps : float
    f : float
        Objective value on entry; updated incrementally from pair gains.
    log : ndarray, shape (3*P, 5)
        Filled row by row: angle, f, gradient norm, skipped, degenerate.
        The gradient-norm column is NaN unless ``record_grad``.
    record_grad : bool

    Returns
    -------
    f : float
    n_rotations : int
    n_degenerate : int
    """
    n_rot = 0
    n_deg = 0
    version = 0
    n = core.shape[0]
    root_n = math.sqrt(n)
    cache = {}

    def block(m):
        # [lam, frobenius, spectral or None], refreshed after every rotation
        hit = cache.get(m)
        if hit is not None and hit[0] == version:
            return hit[1]
        lam = lambda_of(core, m)
        entry = [lam, frobenius_norm(lam), None]
        cache[m] = (version, entry)
        return entry

    def exact_norm(entry):
        if not spectral:
            return entry[1]
        if entry[2] is None:
            entry[2] = spectral_norm(entry[0])
        return entry[2]

    def admissible(entry, p, q):
        fro = entry[1]
        if fro == 0.0:
            return False
        a = 2.0 * abs(entry[0][p, q])
        if spectral:
            # fro / sqrt(n) <= spectral <= fro settles most pivots without an eigen-solve
            if a >= eta * fro * _UPPER_SLACK:
                return True
            if a < eta * (fro / root_n) * _LOWER_SLACK:
                return False
        return a >= eta * exact_norm(entry)

    row = 0
    for p, q in pairs:
        p = int(p)
        q = int(q)
        for m in (1, 2, 3):
            angle = 0.0
            skipped = 0.0
            degenerate = 0.0
            if not admissible(block(m), p, q):
                skipped = 1.0
            else:
                x, y, z, w = (float(v) for v in _coefficients(core, m, p, q))
                scale = _sub_sq_norm(core, p, q) if degenerate_eps > 0.0 else None
                sol = solve_coefficients(x, y, z, w, degenerate_eps, scale)
                if sol.status.value == "degenerate":
                    degenerate = 1.0
                    n_deg += 1
                elif sol.s != 0.0:
                    rotate_slices(core, m, p, q, sol.c, sol.s)
                    rotate_columns(factors[m - 1], p, q, sol.c, sol.s)
                    f += sol.increase
                    angle = math.atan2(sol.s, sol.c)
                    n_rot += 1
                    version += 1
            if record_grad:
                g = 0.0
                for k in (1, 2, 3):
                    nk = exact_norm(block(k))
                    g += nk * nk
                g = math.sqrt(g)
            else:
                g = math.nan
            log[row, ANGLE] = angle
            log[row, F] = f
            log[row, GRAD] = g
            log[row, SKIPPED] = skipped
            log[row, DEGENERATE] = degenerate
            row += 1
    return f, n_rot, n_deg
