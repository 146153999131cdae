"""Angle subproblems on 2x2x2 subtensors.

For a pivot ``(p, q)`` and mode ``m`` only four subtensor entries enter the
pair objective.  With ``(x, y, z, w)`` taken as

==== ===== ===== ===== =====
mode x     y     z     w
==== ===== ===== ===== =====
1    a_ppp a_qpp a_pqq a_qqq
2    a_ppp a_pqp a_qpq a_qqq
3    a_ppp a_ppq a_qqp a_qqq
==== ===== ===== ===== =====

rotating by ``phi`` in mode ``m`` gives new diagonal entries
``x*cos + y*sin`` and ``w*cos - z*sin``; the objective is the sum of their
squares.
"""
import math
from enum import Enum
from typing import NamedTuple

from .errors import ModeError

__all__ = [
    "AngleStatus",
    "AngleSolution",
    "mode_coefficients",
    "tangent_roots",
    "pair_objective",
    "pair_increase",
    "pair_objective_g",
    "solve_coefficients",
    "solve_mode_angle",
]


class AngleStatus(Enum):
    ROTATED = "rotated"
    DEGENERATE = "degenerate"


class AngleSolution(NamedTuple):
    """Chosen rotation; ``gain`` is the new pair objective, ``increase`` its rise."""

    c: float
    s: float
    gain: float
    status: AngleStatus
    increase: float = 0.0

    @property
    def angle(self):
        return math.atan2(self.s, self.c)


def mode_coefficients(sub, m):
    """The ``(x, y, z, w)`` entries of ``sub`` that drive the mode-``m`` angle."""
    if m == 1:
        return sub.a_ppp, sub.a_qpp, sub.a_pqq, sub.a_qqq
    if m == 2:
        return sub.a_ppp, sub.a_pqp, sub.a_qpq, sub.a_qqq
    if m == 3:
        return sub.a_ppp, sub.a_ppq, sub.a_qqp, sub.a_qqq
    raise ModeError(f"mode must be 1, 2 or 3, got {m!r}")


def tangent_roots(lam, mu):
    """Roots of ``lam*t**2 + 2*mu*t - lam = 0`` for ``t = tan(phi)``.

    Returns ``(t1, t2)`` with ``t1`` in the cancellation-free form
    ``lam / (mu + sqrt(mu**2 + lam**2))``.  When ``lam == 0`` and ``mu > 0`` the
    second root is ``math.inf`` (``phi = pi/2``).  Returns ``None`` when both
    are zero: every angle is then stationary.
    """
    if lam == 0.0:
        if mu == 0.0:
            return None
        return 0.0, math.inf
    # scaled so that neither square under- nor overflows
    sc = max(abs(lam), mu)
    r = mu + sc * math.sqrt((mu / sc) * (mu / sc) + (lam / sc) * (lam / sc))
    return lam / r, -r / lam


def pair_objective(x, y, z, w, c, s):
    u = x * c + y * s
    v = w * c - z * s
    return u * u + v * v


def pair_increase(num, den, c, s):
    """``g(phi) - g(0)`` without cancellation.

    Expanding the pair objective gives ``s * (num*c - den*s)`` with
    ``num = 2(xy - zw)`` and ``den = x^2 + w^2 - y^2 - z^2``.  Increases far
    below the rounding level of ``g`` itself are resolved, so near-diagonal
    subtensors still get rotated.
    """
    return s * (num * c - den * s)


def pair_objective_g(sub, m, phi):
    """Pair objective after rotating ``sub`` by ``phi`` in mode ``m``."""
    x, y, z, w = mode_coefficients(sub, m)
    return pair_objective(x, y, z, w, math.cos(phi), math.sin(phi))


def _cos_sin(t):
    if abs(t) <= 1.0:
        c = 1.0 / math.sqrt(1.0 + t * t)
        return c, t * c
    u = 1.0 / t
    k = 1.0 / math.sqrt(1.0 + u * u)
    return k * abs(u), math.copysign(k, t)


def solve_coefficients(x, y, z, w, degenerate_eps=0.0, scale=None):
    """Maximize ``(x c + y s)^2 + (w c - z s)^2`` over the angle.

    Candidates are ``phi = 0`` and the two stationary angles from
    :func:`tangent_roots`, ranked by :func:`pair_increase`; a candidate must
    beat the previous best strictly, so ties go to smaller ``|phi|`` and the
    objective can never decrease.
    """
    num = 2.0 * (x * y - z * w)
    den = x * x + w * w - y * y - z * z
    lam = num if den >= 0.0 else -num
    mu = abs(den)
    g0 = x * x + w * w
    if degenerate_eps > 0.0:
        if scale is None:
            scale = x * x + y * y + z * z + w * w
        thresh = degenerate_eps * scale
        degenerate = abs(lam) <= thresh and mu <= thresh
    else:
        degenerate = lam == 0.0 and mu == 0.0
    if degenerate:
        return AngleSolution(1.0, 0.0, g0, AngleStatus.DEGENERATE)
    best_c, best_s, best_d = 1.0, 0.0, 0.0
    for t in tangent_roots(lam, mu):
        c, s = _cos_sin(t)
        d = pair_increase(num, den, c, s)
        if d > best_d:
            best_c, best_s, best_d = c, s, d
    return AngleSolution(best_c, best_s, g0 + best_d, AngleStatus.ROTATED, best_d)


def solve_mode_angle(sub, m, degenerate_eps=0.0):
    """Optimal mode-``m`` rotation for the subtensor ``sub``.

    ``degenerate_eps`` is relative to the squared norm of the whole
    subtensor; with the default 0 only an exact ``0/0`` in the double-angle
    tangent is degenerate.
    """
    scale = sub.sq_norm() if degenerate_eps > 0.0 else None
    return solve_coefficients(*mode_coefficients(sub, m),
                              degenerate_eps=degenerate_eps, scale=scale)
