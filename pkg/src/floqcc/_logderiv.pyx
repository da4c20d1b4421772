# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled log-derivative propagation kernel (hot loop of the CC solver).

Same contract as the pure-numpy twin in ``_logderiv_py.py``: Johnson's
multichannel log-derivative recursion over one uniform-step sector, with
LAPACK dgesv doing the per-step linear solves.
"""

import numpy as np

cimport numpy as cnp
from scipy.linalg.cython_lapack cimport dgesv

cnp.import_array()


cdef void _build_q(double[::1, :] q, double[:] k2, double[:] lcent,
                   double[:, :, :] wmats, double[:, :] vvals,
                   double[:] rvals, Py_ssize_t j) noexcept:
    cdef Py_ssize_t n = q.shape[0]
    cdef Py_ssize_t nlam = wmats.shape[0]
    cdef Py_ssize_t a, b, lam
    cdef double v, r2inv
    for b in range(n):
        for a in range(n):
            q[a, b] = 0.0
    for lam in range(nlam):
        v = vvals[j, lam]
        if v == 0.0:
            continue
        for b in range(n):
            for a in range(n):
                q[a, b] -= v * wmats[lam, a, b]
    r2inv = 1.0 / (rvals[j] * rvals[j])
    for a in range(n):
        q[a, a] += k2[a] - lcent[a] * r2inv


def logderiv_sector(y, k2, lcent, wmats, vvals, rvals, double h,
                    bint start_correction):
    """Propagate the log-derivative matrix across one sector (compiled)."""
    cdef Py_ssize_t nsteps = rvals.shape[0] - 1
    if nsteps % 2 != 0:
        raise ValueError("sector must have an even number of steps")

    cdef cnp.ndarray[double, ndim=2, mode='fortran'] ycur = \
        np.asfortranarray(np.array(y, dtype=np.float64))
    cdef Py_ssize_t n = ycur.shape[0]
    cdef cnp.ndarray[double, ndim=2, mode='fortran'] q = \
        np.zeros((n, n), dtype=np.float64, order='F')
    cdef cnp.ndarray[double, ndim=2, mode='fortran'] amat = \
        np.zeros((n, n), dtype=np.float64, order='F')
    cdef cnp.ndarray[double, ndim=2, mode='fortran'] rhs = \
        np.zeros((n, n), dtype=np.float64, order='F')
    cdef cnp.ndarray[int, ndim=1] ipiv = np.zeros(n, dtype=np.intc)

    cdef double[:] k2v = np.ascontiguousarray(k2, dtype=np.float64)
    cdef double[:] lcv = np.ascontiguousarray(lcent, dtype=np.float64)
    cdef double[:, :, :] wv = np.ascontiguousarray(wmats, dtype=np.float64)
    cdef double[:, :] vv = np.ascontiguousarray(vvals, dtype=np.float64)
    cdef double[:] rv = np.ascontiguousarray(rvals, dtype=np.float64)

    cdef double[::1, :] qv = q
    cdef double[::1, :] av = amat
    cdef double[::1, :] rhsv = rhs
    cdef double[::1, :] yv = ycur

    cdef int info = 0, ni = <int>n
    cdef Py_ssize_t j, a, b
    cdef double w, h6 = h * h / 6.0, h3 = h / 3.0

    if start_correction:
        _build_q(qv, k2v, lcv, wv, vv, rv, 0)
        for b in range(n):
            for a in range(n):
                yv[a, b] -= h3 * qv[a, b]

    for j in range(1, nsteps + 1):
        if j % 2 == 1:
            # half point: U = (I + h^2/6 Q)^{-1} Q, weight 4
            _build_q(qv, k2v, lcv, wv, vv, rv, j)
            for b in range(n):
                for a in range(n):
                    av[a, b] = h6 * qv[a, b]
                    rhsv[a, b] = qv[a, b]
                av[b, b] += 1.0
            dgesv(&ni, &ni, &av[0, 0], &ni, <int*>ipiv.data, &rhsv[0, 0], &ni, &info)
            if info != 0:
                raise np.linalg.LinAlgError("dgesv failed on half-point solve")
            w = 4.0
        else:
            _build_q(rhsv, k2v, lcv, wv, vv, rv, j)
            w = 1.0 if j == nsteps else 2.0
        # y <- (I + h y)^{-1} y - (h/3) w U   (rhsv currently holds U)
        for b in range(n):
            for a in range(n):
                av[a, b] = h * yv[a, b]
                qv[a, b] = yv[a, b]
            av[b, b] += 1.0
        dgesv(&ni, &ni, &av[0, 0], &ni, <int*>ipiv.data, &qv[0, 0], &ni, &info)
        if info != 0:
            raise np.linalg.LinAlgError("dgesv failed on log-derivative update")
        for b in range(n):
            for a in range(n):
                yv[a, b] = qv[a, b] - h3 * w * rhsv[a, b]
    return ycur
