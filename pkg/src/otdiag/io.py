"""Text formats for tensors, matrices and solver traces.

Tensor file::

    otd-tensor3 v1
    <n>
    <n**3 reals, first index fastest, one per line>

Matrix file::

    otd-matrix v1
    <rows> <cols>
    <rows*cols reals, column-major, one per line>

Reals are written with 17 significant digits, so a write/read round trip is
exact.  Pivot indices in trace files are 1-based.
"""
import csv
import math

import numpy as np

from .errors import ParseError, ShapeError
from .tensor import as_tensor3

__all__ = [
    "TENSOR_MAGIC",
    "MATRIX_MAGIC",
    "TRACE_HEADER",
    "format_real",
    "write_tensor",
    "read_tensor",
    "write_matrix",
    "read_matrix",
    "write_trace",
]

TENSOR_MAGIC = "otd-tensor3 v1"
MATRIX_MAGIC = "otd-matrix v1"
TRACE_HEADER = ("sweep", "step", "i", "j", "mode", "angle", "f", "off_rel", "grad_norm",
                "skipped", "degenerate")


def format_real(x):
    return format(float(x), ".17g")


def _write_lines(path, head, values):
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        for line in head:
            fh.write(line + "\n")
        for v in values:
            fh.write(format_real(v) + "\n")


def write_tensor(path, t):
    t = as_tensor3(t)
    _write_lines(path, [TENSOR_MAGIC, str(t.shape[0])], np.ravel(t, order="F"))


def write_matrix(path, m):
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2:
        raise ShapeError(f"expected a 2-d array, got shape {m.shape}")
    _write_lines(path, [MATRIX_MAGIC, f"{m.shape[0]} {m.shape[1]}"], np.ravel(m, order="F"))


def _read_lines(path):
    with open(path, "r", encoding="ascii", errors="replace") as fh:
        return fh.read().splitlines()


def _expect_magic(lines, magic):
    if not lines:
        raise ParseError(f"empty file, expected header {magic!r}", line=1)
    if lines[0].strip() != magic:
        raise ParseError(f"expected header {magic!r}, got {lines[0].strip()!r}", line=1)


def _positive_ints(line, lineno, count):
    parts = line.split()
    if len(parts) != count:
        raise ParseError(f"expected {count} integer(s), got {line.strip()!r}", line=lineno)
    try:
        vals = [int(p) for p in parts]
    except ValueError:
        raise ParseError(f"expected integer(s), got {line.strip()!r}", line=lineno) from None
    if any(v < 1 for v in vals):
        raise ParseError(f"sizes must be positive, got {line.strip()!r}", line=lineno)
    return vals


def _reals(lines, start, count):
    """Parse ``count`` reals from ``lines[start:]``, one per non-blank line."""
    out = np.empty(count)
    k = 0
    for idx in range(start, len(lines)):
        text = lines[idx].strip()
        if not text:
            continue
        lineno = idx + 1
        if k == count:
            raise ParseError(f"unexpected extra value {text!r}", line=lineno)
        try:
            v = float(text)
        except ValueError:
            raise ParseError(f"not a real number: {text!r}", line=lineno) from None
        if not math.isfinite(v):
            raise ParseError(f"non-finite value {text!r}", line=lineno)
        out[k] = v
        k += 1
    if k < count:
        raise ParseError(f"expected {count} values, file ends after {k}", line=len(lines) + 1)
    return out


def read_tensor(path):
    """Read an ``otd-tensor3 v1`` file as an ``(n, n, n)`` Fortran-ordered array."""
    lines = _read_lines(path)
    _expect_magic(lines, TENSOR_MAGIC)
    if len(lines) < 2:
        raise ParseError("missing size line", line=2)
    (n,) = _positive_ints(lines[1], 2, 1)
    data = _reals(lines, 2, n ** 3)
    return np.asfortranarray(data.reshape((n, n, n), order="F"))


def read_matrix(path):
    lines = _read_lines(path)
    _expect_magic(lines, MATRIX_MAGIC)
    if len(lines) < 2:
        raise ParseError("missing size line", line=2)
    rows, cols = _positive_ints(lines[1], 2, 2)
    data = _reals(lines, 2, rows * cols)
    return np.asfortranarray(data.reshape((rows, cols), order="F"))


def _index(v):
    return "" if v is None else str(v + 1)


def write_trace(path, trace):
    """Write trace records as CSV; sweep-end rows leave ``i, j, mode`` empty."""
    with open(path, "w", encoding="ascii", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(TRACE_HEADER)
        for r in trace:
            out.writerow([
                r.sweep, r.step, _index(r.i), _index(r.j),
                "" if r.mode is None else r.mode,
                format_real(r.angle), format_real(r.f), format_real(r.off_rel),
                format_real(r.grad_norm), int(r.skipped), int(r.degenerate),
            ])
