"""Cyclic pivot orderings.

Pairs are 0-based ``(i, j)`` with ``i < j``.  Five built-in orderings:

``row``      (0,1),(0,2),...,(0,n-1),(1,2),...,(n-2,n-1)
``col``      (0,1),(0,2),(1,2),(0,3),(1,3),(2,3),...
``row-rev``  rows bottom-up, each row left to right:
             (n-2,n-1),(n-3,n-2),(n-3,n-1),...,(0,1),...,(0,n-1)
``col-rev``  columns right-to-left, each column top-down
``diag``     by superdiagonals: (0,1),(1,2),...,(0,2),(1,3),...,(0,n-1)
"""
from enum import Enum

import numpy as np

from .errors import ConfigError, ParseError

__all__ = ["Ordering", "cycle", "check_cycle", "read_ordering"]


class Ordering(Enum):
    ROW = "row"
    COL = "col"
    ROW_REV = "row-rev"
    COL_REV = "col-rev"
    DIAG = "diag"


def cycle(ordering, n):
    """One full cycle of pivot pairs for ``n x n`` factors."""
    ordering = Ordering(ordering)
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    if ordering is Ordering.ROW:
        return [(i, j) for i in range(n - 1) for j in range(i + 1, n)]
    if ordering is Ordering.COL:
        return [(i, j) for j in range(1, n) for i in range(j)]
    if ordering is Ordering.ROW_REV:
        return [(i, j) for i in range(n - 2, -1, -1) for j in range(i + 1, n)]
    if ordering is Ordering.COL_REV:
        return [(i, j) for j in range(n - 1, 0, -1) for i in range(j)]
    return [(i, i + d) for d in range(1, n) for i in range(n - d)]


def check_cycle(pairs, n):
    """Raise :class:`ConfigError` unless ``pairs`` visits every ``i < j`` exactly once."""
    pairs = [tuple(int(v) for v in p) for p in pairs]
    expected = {(i, j) for i in range(n - 1) for j in range(i + 1, n)}
    if len(pairs) != len(expected) or set(pairs) != expected:
        raise ConfigError(
            f"ordering is not a permutation of the {len(expected)} pivot pairs for n={n}")
    return pairs


def read_ordering(path, n):
    """Read a custom ordering: one 1-based pair ``i j`` per line, ``#`` comments allowed."""
    pairs = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            parts = text.replace(",", " ").split()
            if len(parts) != 2:
                raise ParseError(f"expected two indices, got {text!r}", lineno)
            try:
                i, j = (int(v) - 1 for v in parts)
            except ValueError:
                raise ParseError(f"non-integer pivot {text!r}", lineno) from None
            if not (0 <= i < j < n):
                raise ParseError(f"pivot ({i + 1}, {j + 1}) out of range for n={n}", lineno)
            pairs.append((i, j))
    try:
        return check_cycle(pairs, n)
    except ConfigError as exc:
        raise ParseError(str(exc)) from None


def as_pair_array(pairs):
    return np.ascontiguousarray(np.asarray(pairs, dtype=np.intp).reshape(-1, 2))
