"""Dense third-order cube tensors: multilinear algebra, norms, symmetry, generators.

Tensors are plain ``numpy`` arrays of shape ``(n, n, n)`` indexed ``t[i, j, k]``
(0-based).  The canonical linear layout, used by the text file format and by
:func:`matricize`, is first-index-fastest (Fortran order): entry ``(i, j, k)``
lives at offset ``i + j*n + k*n**2``.

Matricization column ordering (our convention, not fixed by the literature):

* mode 1: ``X_(1)[i, j + k*n] = x[i, j, k]``
* mode 2: ``X_(2)[j, i + k*n] = x[i, j, k]``
* mode 3: ``X_(3)[k, i + j*n] = x[i, j, k]``

i.e. the remaining indices vary with the lower mode number fastest.
"""
from typing import NamedTuple

import numpy as np

from .errors import ModeError, PivotError, RotationError, ShapeError

__all__ = [
    "Subtensor222",
    "as_tensor3",
    "matricize",
    "fold",
    "mode_product",
    "apply_plane_rotation",
    "rotation_matrix",
    "norm",
    "off_norm",
    "diag",
    "diag_sq_sum",
    "inner",
    "relative_off_norm",
    "extract_subtensor",
    "symmetrize",
    "antisymmetrize",
    "asymmetry",
    "is_antisymmetric",
    "random_orthogonal",
    "diagonal_tensor",
    "gen_random",
    "gen_diagonalizable",
    "gen_symmetric",
    "gen_antisymmetric",
    "gen_paper_T",
]


def _check_mode(m):
    if m not in (1, 2, 3):
        raise ModeError(f"mode must be 1, 2 or 3, got {m!r}")


def as_tensor3(x, copy=False):
    """Validate and convert ``x`` to a float64 ``(n, n, n)`` array.

    Raises :class:`ShapeError` for non-cubic input and ``ValueError`` for
    non-finite entries.
    """
    t = np.array(x, dtype=np.float64, order="F", copy=True if copy else None)
    if t.ndim != 3 or not (t.shape[0] == t.shape[1] == t.shape[2]) or t.shape[0] < 1:
        raise ShapeError(f"expected an n x n x n tensor, got shape {t.shape}")
    if not np.all(np.isfinite(t)):
        raise ValueError("tensor has non-finite entries")
    return t


def matricize(t, m):
    """Mode-``m`` unfolding of ``t`` as an ``n x n**2`` matrix."""
    _check_mode(m)
    t = np.asarray(t)
    n = t.shape[0]
    return np.moveaxis(t, m - 1, 0).reshape(n, -1, order="F")


def fold(mat, m, n):
    """Inverse of :func:`matricize`."""
    _check_mode(m)
    mat = np.asarray(mat)
    if mat.shape != (n, n * n):
        raise ShapeError(f"expected a {n} x {n * n} matrix, got {mat.shape}")
    return np.asfortranarray(np.moveaxis(mat.reshape(n, n, n, order="F"), 0, m - 1))


def mode_product(t, m, a):
    """Return ``t x_m a``, the tensor whose mode-``m`` unfolding is ``a @ X_(m)``."""
    _check_mode(m)
    t = np.asarray(t)
    a = np.asarray(a, dtype=np.float64)
    n = t.shape[0]
    if a.shape != (n, n):
        raise ShapeError(f"mode product needs a {n} x {n} matrix, got {a.shape}")
    y = np.tensordot(a, t, axes=(1, m - 1))
    return np.asfortranarray(np.moveaxis(y, 0, m - 1))


def rotation_matrix(n, i, j, c, s):
    """Plane rotation ``R(i, j, phi)`` with ``c`` on (i,i),(j,j), ``-s`` at (i,j), ``s`` at (j,i)."""
    r = np.eye(n)
    r[i, i] = r[j, j] = c
    r[i, j] = -s
    r[j, i] = s
    return r


def _check_pivot(n, i, j):
    if not (0 <= i < j < n):
        raise PivotError(f"pivot must satisfy 0 <= i < j < {n}, got ({i}, {j})")


def apply_plane_rotation(t, m, i, j, c, s):
    """In place ``t <- t x_m R(i, j, phi)^T``.

    Only the two mode-``m`` slices ``i`` and ``j`` are touched::

        slice_i <-  c*slice_i + s*slice_j
        slice_j <- -s*slice_i + c*slice_j
    """
    _check_mode(m)
    n = t.shape[0]
    _check_pivot(n, i, j)
    if abs(c * c + s * s - 1.0) > 1e-12:
        raise RotationError(f"c^2 + s^2 = {c * c + s * s!r} is not 1")
    idx = [slice(None)] * 3
    idx[m - 1] = i
    si = tuple(idx)
    idx[m - 1] = j
    sj = tuple(idx)
    xi = t[si].copy()
    xj = t[sj]
    t[si] = c * xi + s * xj
    t[sj] = c * xj - s * xi


def norm(t):
    """Frobenius norm."""
    t = np.asarray(t)
    return float(np.sqrt(np.sum(t * t)))


def diag(t):
    """Superdiagonal ``(t[0,0,0], ..., t[n-1,n-1,n-1])``."""
    t = np.asarray(t)
    r = np.arange(t.shape[0])
    return t[r, r, r].copy()


def diag_sq_sum(t):
    """Sum of squared diagonal entries (the objective being maximized)."""
    d = diag(t)
    return float(d @ d)


def off_norm(t):
    """Frobenius norm of the off-diagonal part.

    Summed over the off-diagonal entries directly; ``sqrt(||t||^2 - f)`` loses
    half the digits to cancellation once ``t`` is nearly diagonal.
    """
    t = np.asarray(t)
    sq = t * t
    r = np.arange(t.shape[0])
    sq[r, r, r] = 0.0
    return float(np.sqrt(np.sum(sq)))


def relative_off_norm(t):
    """``off(t) / ||t||``; zero for the zero tensor."""
    nrm = norm(t)
    return off_norm(t) / nrm if nrm > 0 else 0.0


def inner(t1, t2):
    t1 = np.asarray(t1)
    t2 = np.asarray(t2)
    if t1.shape != t2.shape:
        raise ShapeError(f"inner product of shapes {t1.shape} and {t2.shape}")
    return float(np.sum(t1 * t2))


class Subtensor222(NamedTuple):
    """The eight entries of ``t`` with indices drawn from ``{p, q}``."""

    a_ppp: float
    a_qpp: float
    a_pqp: float
    a_ppq: float
    a_qqp: float
    a_qpq: float
    a_pqq: float
    a_qqq: float
    p: int
    q: int

    def sq_norm(self):
        return sum(v * v for v in self[:8])


def extract_subtensor(t, p, q):
    n = t.shape[0]
    _check_pivot(n, p, q)
    return Subtensor222(
        float(t[p, p, p]), float(t[q, p, p]), float(t[p, q, p]), float(t[p, p, q]),
        float(t[q, q, p]), float(t[q, p, q]), float(t[p, q, q]), float(t[q, q, q]),
        p, q,
    )


_PERMS = [(0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)]
_SIGNS = [1.0, -1.0, -1.0, 1.0, 1.0, -1.0]


def symmetrize(t):
    """Average of ``t`` over all six index permutations."""
    t = np.asarray(t, dtype=np.float64)
    return np.asfortranarray(sum(np.transpose(t, p) for p in _PERMS) / 6.0)


def antisymmetrize(t):
    """Signed average of ``t`` over all six index permutations.

    The value is computed once per strictly increasing ``(i, j, k)`` and copied
    with signs, so the result is exactly antisymmetric and exactly zero
    wherever an index repeats.
    """
    t = np.asarray(t, dtype=np.float64)
    n = t.shape[0]
    a = ((t - np.transpose(t, (0, 2, 1)))
         + (np.transpose(t, (1, 2, 0)) - np.transpose(t, (1, 0, 2)))
         + (np.transpose(t, (2, 0, 1)) - np.transpose(t, (2, 1, 0)))) / 6.0
    i, j, k = np.ogrid[:n, :n, :n]
    canon = np.where((i < j) & (j < k), a, 0.0)
    out = np.zeros_like(canon)
    for perm, sign in zip(_PERMS, _SIGNS):
        out += sign * np.transpose(canon, np.argsort(perm))
    return np.asfortranarray(out)


def asymmetry(t):
    """``||t - sym(t)||``."""
    return norm(np.asarray(t) - symmetrize(t))


def is_antisymmetric(t, tol=0.0):
    """True if every transposition of two indices flips the sign (within ``tol``).

    Entries with a repeated index must then vanish, which the pair-swap test
    already enforces up to ``2*tol``; they are additionally checked against
    ``tol`` directly.
    """
    t = np.asarray(t)
    for perm in ((1, 0, 2), (0, 2, 1), (2, 1, 0)):
        if np.max(np.abs(t + np.transpose(t, perm)), initial=0.0) > tol:
            return False
    n = t.shape[0]
    r = np.arange(n)
    repeated = np.concatenate([
        t[r, r, :].ravel(), t[r, :, r].ravel(), t[:, r, r].ravel()])
    return bool(np.max(np.abs(repeated), initial=0.0) <= tol)


def random_orthogonal(n, rng):
    """Orthogonal factor of the QR of a standard normal matrix, R diagonal made nonnegative."""
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    signs = np.where(np.diag(r) < 0, -1.0, 1.0)
    return q * signs[None, :]


def diagonal_tensor(d):
    d = np.asarray(d, dtype=np.float64)
    n = d.shape[0]
    t = np.zeros((n, n, n), order="F")
    r = np.arange(n)
    t[r, r, r] = d
    return t


def _check_size(n):
    if int(n) != n or n < 2:
        raise ShapeError(f"tensor size must be an integer >= 2, got {n!r}")
    return int(n)


def _normal_tensor(n, rng):
    # entries drawn in storage order (first index fastest)
    return np.asfortranarray(rng.standard_normal(n ** 3).reshape((n, n, n), order="F"))


def gen_random(n, seed):
    """I.i.d. standard normal entries."""
    n = _check_size(n)
    return _normal_tensor(n, np.random.default_rng(seed))


def gen_diagonalizable(n, seed):
    """Random diagonal tensor rotated in each mode by an independent random orthogonal matrix."""
    n = _check_size(n)
    rng = np.random.default_rng(seed)
    t = diagonal_tensor(rng.standard_normal(n))
    for m in (1, 2, 3):
        t = mode_product(t, m, random_orthogonal(n, rng))
    return t


def gen_symmetric(n, seed):
    return symmetrize(gen_random(n, seed))


def gen_antisymmetric(n, seed):
    t = antisymmetrize(gen_random(n, seed))
    assert is_antisymmetric(t, 0.0)
    return t


def gen_paper_T():
    """The symmetric 3x3x3 tensor with unit entries on the permutations of (1, 2, 3)."""
    t = np.zeros((3, 3, 3), order="F")
    for p in _PERMS:
        t[p] = 1.0
    return t
