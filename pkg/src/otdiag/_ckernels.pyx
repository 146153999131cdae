# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled sweep kernel; same contract and log layout as ``otdiag._pykernels``."""
import numpy as np

from libc.math cimport atan2, fabs, sqrt, NAN
from scipy.linalg.cython_blas cimport dnrm2, dsyrk
from scipy.linalg.cython_lapack cimport dsyevr

from .gradient import SPECTRAL_EXACT_MAX_N, _power_spectral

DEF ANGLE = 0
DEF F = 1
DEF GRAD = 2
DEF SKIPPED = 3
DEF DEGENERATE = 4

cdef double _UPPER_SLACK = 1.0 + 1e-12
cdef double _LOWER_SLACK = 1.0 - 1e-12


cdef inline double _entry_mixed(double[::1, :, :] t, int m, Py_ssize_t l, Py_ssize_t p) nogil:
    # core entry with index l in mode m and p in the other two modes
    if m == 1:
        return t[l, p, p]
    elif m == 2:
        return t[p, l, p]
    return t[p, p, l]


cdef void _lambda(double[::1, :, :] t, int m, double[::1, :] lam) noexcept nogil:
    cdef Py_ssize_t n = t.shape[0]
    cdef Py_ssize_t l, p
    cdef double kl, kp
    for p in range(n):
        for l in range(n):
            kl = _entry_mixed(t, m, l, p) * t[p, p, p]
            kp = _entry_mixed(t, m, p, l) * t[l, l, l]
            lam[l, p] = kl - kp


cdef class _Workspace:
    cdef int n
    cdef double[::1, :] gram
    cdef double[::1] w
    cdef double[::1] work
    cdef int[::1] iwork
    cdef int[::1] isuppz
    cdef int lwork, liwork

    def __init__(self, int n):
        self.n = n
        self.gram = np.zeros((n, n), order="F")
        self.w = np.zeros(n)
        self.isuppz = np.zeros(2 * n, dtype=np.intc)
        self.lwork = 26 * n + 64
        self.liwork = 10 * n + 64
        self.work = np.zeros(self.lwork)
        self.iwork = np.zeros(self.liwork, dtype=np.intc)


cdef double _spectral(double[::1, :] lam, _Workspace ws) except -1.0:
    cdef int n = lam.shape[0]
    cdef int i, j
    cdef bint nonzero = False
    for j in range(n):
        for i in range(n):
            if lam[i, j] != 0.0:
                nonzero = True
                break
        if nonzero:
            break
    if not nonzero:
        return 0.0
    if n > SPECTRAL_EXACT_MAX_N:
        return _power_spectral(np.asarray(lam))
    cdef char uplo = b'U'
    cdef char trans = b'T'
    cdef char jobz = b'N'
    cdef char rng = b'I'
    cdef double one = 1.0, zero = 0.0, vl = 0.0, vu = 0.0, abstol = 0.0
    cdef int il = n, iu = n, found = 0, ldz = 1, info = 0
    cdef double zdummy = 0.0
    dsyrk(&uplo, &trans, &n, &n, &one, &lam[0, 0], &n, &zero, &ws.gram[0, 0], &n)
    dsyevr(&jobz, &rng, &uplo, &n, &ws.gram[0, 0], &n, &vl, &vu, &il, &iu, &abstol,
           &found, &ws.w[0], &zdummy, &ldz, &ws.isuppz[0], &ws.work[0], &ws.lwork,
           &ws.iwork[0], &ws.liwork, &info)
    if info != 0:
        raise ArithmeticError(f"dsyevr failed with info={info}")
    return sqrt(ws.w[0]) if ws.w[0] > 0.0 else 0.0


cdef double _frobenius(double[::1, :] lam) noexcept nogil:
    cdef int nn = lam.shape[0] * lam.shape[1]
    cdef int inc = 1
    return dnrm2(&nn, &lam[0, 0], &inc)


# x <- x + ((c - 1) x + s y) with c - 1 = -s^2 / (1 + c): no bias from c rounding to 1
cdef void _rotate_slices(double[::1, :, :] t, int m, Py_ssize_t i, Py_ssize_t j,
                         double c, double s) noexcept nogil:
    cdef Py_ssize_t n = t.shape[0]
    cdef Py_ssize_t a, b
    cdef double xi, xj
    cdef double d = -(s * s) / (1.0 + c)
    if m == 1:
        for b in range(n):
            for a in range(n):
                xi = t[i, a, b]
                xj = t[j, a, b]
                t[i, a, b] = xi + (d * xi + s * xj)
                t[j, a, b] = xj + (d * xj - s * xi)
    elif m == 2:
        for b in range(n):
            for a in range(n):
                xi = t[a, i, b]
                xj = t[a, j, b]
                t[a, i, b] = xi + (d * xi + s * xj)
                t[a, j, b] = xj + (d * xj - s * xi)
    else:
        for b in range(n):
            for a in range(n):
                xi = t[a, b, i]
                xj = t[a, b, j]
                t[a, b, i] = xi + (d * xi + s * xj)
                t[a, b, j] = xj + (d * xj - s * xi)


cdef void _rotate_columns(double[::1, :] q, Py_ssize_t i, Py_ssize_t j,
                          double c, double s) noexcept nogil:
    cdef Py_ssize_t n = q.shape[0]
    cdef Py_ssize_t a
    cdef double qi, qj
    cdef double d = -(s * s) / (1.0 + c)
    for a in range(n):
        qi = q[a, i]
        qj = q[a, j]
        q[a, i] = qi + (d * qi + s * qj)
        q[a, j] = qj + (d * qj - s * qi)


cdef inline void _cos_sin(double t, double* c, double* s) noexcept nogil:
    cdef double u, k
    if fabs(t) <= 1.0:
        c[0] = 1.0 / sqrt(1.0 + t * t)
        s[0] = t * c[0]
    else:
        u = 1.0 / t
        k = 1.0 / sqrt(1.0 + u * u)
        c[0] = k * fabs(u)
        s[0] = k if t > 0.0 else -k


cdef inline double _increase(double num, double den, double c, double s) noexcept nogil:
    return s * (num * c - den * s)


cdef int _solve(double x, double y, double z, double w, double eps, double scale,
                double* c_out, double* s_out, double* inc_out) noexcept nogil:
    """Returns 1 when degenerate; mirrors rotation.solve_coefficients."""
    cdef double num = 2.0 * (x * y - z * w)
    cdef double den = x * x + w * w - y * y - z * z
    cdef double lam = num if den >= 0.0 else -num
    cdef double mu = fabs(den)
    cdef double thresh, r, sc, c, s, d
    cdef double bc = 1.0, bs = 0.0, bd = 0.0
    c_out[0] = 1.0
    s_out[0] = 0.0
    inc_out[0] = 0.0
    if eps > 0.0:
        thresh = eps * scale
        if fabs(lam) <= thresh and mu <= thresh:
            return 1
    elif lam == 0.0 and mu == 0.0:
        return 1
    if lam == 0.0:
        # roots t = 0 and t = inf; only phi = pi/2 can improve
        d = _increase(num, den, 0.0, 1.0)
        if d > bd:
            bc = 0.0
            bs = 1.0
            bd = d
    else:
        sc = fabs(lam) if fabs(lam) > mu else mu
        r = mu + sc * sqrt((mu / sc) * (mu / sc) + (lam / sc) * (lam / sc))
        _cos_sin(lam / r, &c, &s)
        d = _increase(num, den, c, s)
        if d > bd:
            bc = c
            bs = s
            bd = d
        _cos_sin(-r / lam, &c, &s)
        d = _increase(num, den, c, s)
        if d > bd:
            bc = c
            bs = s
            bd = d
    c_out[0] = bc
    s_out[0] = bs
    inc_out[0] = bd
    return 0


cdef inline void _coefficients(double[::1, :, :] t, int m, Py_ssize_t p, Py_ssize_t q,
                               double* x, double* y, double* z, double* w) noexcept nogil:
    x[0] = t[p, p, p]
    w[0] = t[q, q, q]
    if m == 1:
        y[0] = t[q, p, p]
        z[0] = t[p, q, q]
    elif m == 2:
        y[0] = t[p, q, p]
        z[0] = t[q, p, q]
    else:
        y[0] = t[p, p, q]
        z[0] = t[q, q, p]


cdef double _sub_sq_norm(double[::1, :, :] t, Py_ssize_t p, Py_ssize_t q) noexcept nogil:
    cdef Py_ssize_t idx[2]
    cdef int a, b, c
    cdef double v, acc = 0.0
    idx[0] = p
    idx[1] = q
    for c in range(2):
        for b in range(2):
            for a in range(2):
                v = t[idx[a], idx[b], idx[c]]
                acc += v * v
    return acc


cdef class _Blocks:
    """Per-mode gradient blocks with lazily computed norms, invalidated by rotations."""
    cdef double[::1, :, :] t
    cdef _Workspace ws
    cdef list lams
    cdef long version
    cdef long stamp[3]
    cdef double fro[3]
    cdef double spec[3]
    cdef bint have_spec[3]

    def __init__(self, core):
        cdef int n = core.shape[0]
        self.t = core
        self.ws = _Workspace(n)
        self.lams = [np.zeros((n, n), order="F") for _ in range(3)]
        self.version = 0
        for m in range(3):
            self.stamp[m] = -1

    cdef double[::1, :] get(self, int m):
        cdef double[::1, :] lam = self.lams[m - 1]
        if self.stamp[m - 1] != self.version:
            _lambda(self.t, m, lam)
            self.fro[m - 1] = _frobenius(lam)
            self.have_spec[m - 1] = False
            self.stamp[m - 1] = self.version
        return lam

    cdef double exact(self, int m, bint spectral) except -1.0:
        cdef double[::1, :] lam = self.get(m)
        if not spectral:
            return self.fro[m - 1]
        if not self.have_spec[m - 1]:
            self.spec[m - 1] = _spectral(lam, self.ws)
            self.have_spec[m - 1] = True
        return self.spec[m - 1]

    cdef int admissible(self, int m, Py_ssize_t p, Py_ssize_t q, double eta,
                        bint spectral, double root_n) except -1:
        cdef double[::1, :] lam = self.get(m)
        cdef double fro = self.fro[m - 1]
        cdef double a
        if fro == 0.0:
            return 0
        a = 2.0 * fabs(lam[p, q])
        if spectral:
            # fro / sqrt(n) <= spectral <= fro settles most pivots without an eigen-solve
            if a >= eta * fro * _UPPER_SLACK:
                return 1
            if a < eta * (fro / root_n) * _LOWER_SLACK:
                return 0
        return 1 if a >= eta * self.exact(m, spectral) else 0


def sweep(core, factors, pairs, double eta, bint spectral, double degenerate_eps,
          double f, log, bint record_grad):
    """One cycle of microiterations; see ``otdiag._pykernels.sweep``."""
    cdef double[::1, :, :] t = core
    cdef double[::1, :] qu = factors[0]
    cdef double[::1, :] qv = factors[1]
    cdef double[::1, :] qw = factors[2]
    cdef double[::1, :] qm
    cdef Py_ssize_t[:, :] pr = np.asarray(pairs, dtype=np.intp)
    cdef double[:, :] out = log
    cdef int n = t.shape[0]
    cdef double root_n = sqrt(<double>n)
    cdef _Blocks blocks = _Blocks(core)
    cdef Py_ssize_t k, row = 0
    cdef Py_ssize_t p, q
    cdef int m, mm, deg
    cdef double x, y, z, w, c, s, inc, scale, angle, skipped, degenerate, g, nk
    cdef long n_rot = 0, n_deg = 0

    for k in range(pr.shape[0]):
        p = pr[k, 0]
        q = pr[k, 1]
        for m in range(1, 4):
            angle = 0.0
            skipped = 0.0
            degenerate = 0.0
            if not blocks.admissible(m, p, q, eta, spectral, root_n):
                skipped = 1.0
            else:
                _coefficients(t, m, p, q, &x, &y, &z, &w)
                scale = _sub_sq_norm(t, p, q) if degenerate_eps > 0.0 else 0.0
                deg = _solve(x, y, z, w, degenerate_eps, scale, &c, &s, &inc)
                if deg:
                    degenerate = 1.0
                    n_deg += 1
                elif s != 0.0:
                    _rotate_slices(t, m, p, q, c, s)
                    qm = qu if m == 1 else (qv if m == 2 else qw)
                    _rotate_columns(qm, p, q, c, s)
                    f += inc
                    angle = atan2(s, c)
                    n_rot += 1
                    blocks.version += 1
            if record_grad:
                g = 0.0
                for mm in range(1, 4):
                    nk = blocks.exact(mm, spectral)
                    g += nk * nk
                g = sqrt(g)
            else:
                g = NAN
            out[row, ANGLE] = angle
            out[row, F] = f
            out[row, GRAD] = g
            out[row, SKIPPED] = skipped
            out[row, DEGENERATE] = degenerate
            row += 1
    return f, n_rot, n_deg
