# cython: boundscheck=False, wraparound=False, cdivision=True
"""Cyclic Jacobi eigensolver for small dense complex Hermitian matrices.

Compiled counterpart of :mod:`inlbound._jacobi_py`; both expose the same
two functions and must agree to rounding.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs, hypot, atan2, cos, sin

cnp.import_array()

ctypedef double complex cplx


cdef double _off_norm(cplx[:, :] a, Py_ssize_t n) nogil:
    cdef Py_ssize_t i, j
    cdef double acc = 0.0
    for i in range(n):
        for j in range(n):
            if i != j:
                acc += a[i, j].real * a[i, j].real + a[i, j].imag * a[i, j].imag
    return sqrt(acc)


cdef double _fro_norm(cplx[:, :] a, Py_ssize_t n) nogil:
    cdef Py_ssize_t i, j
    cdef double acc = 0.0
    for i in range(n):
        for j in range(n):
            acc += a[i, j].real * a[i, j].real + a[i, j].imag * a[i, j].imag
    return sqrt(acc)


cdef int _jacobi_inplace(cplx[:, :] a, cplx[:, :] v, bint want_vectors,
                         double tol, int max_sweeps) nogil:
    """Diagonalize ``a`` in place; accumulate rotations into ``v``.

    Returns the number of sweeps used, or -1 if not converged.
    """
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t p, q, k
    cdef int sweep
    cdef double r, phi, tau, t, c, s, app, aqq
    cdef cplx ph, phc, akp, akq, apk, aqk
    cdef double scale = _fro_norm(a, n)
    cdef double thresh = tol * (scale if scale > 1.0 else 1.0)

    for sweep in range(max_sweeps):
        if _off_norm(a, n) < thresh:
            return sweep
        for p in range(n - 1):
            for q in range(p + 1, n):
                r = hypot(a[p, q].real, a[p, q].imag)
                if r < 1e-300:
                    continue
                phi = atan2(a[p, q].imag, a[p, q].real)
                ph = cos(phi) - 1j * sin(phi)      # e^{-i phi}
                phc = cos(phi) + 1j * sin(phi)     # e^{+i phi}
                app = a[p, p].real
                aqq = a[q, q].real
                tau = (aqq - app) / (2.0 * r)
                if tau >= 0:
                    t = 1.0 / (tau + sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + sqrt(1.0 + tau * tau))
                c = 1.0 / sqrt(1.0 + t * t)
                s = t * c
                # columns: A <- A G
                for k in range(n):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = c * akp - s * ph * akq
                    a[k, q] = s * akp + c * ph * akq
                # rows: A <- G^dagger A
                for k in range(n):
                    apk = a[p, k]
                    aqk = a[q, k]
                    a[p, k] = c * apk - s * phc * aqk
                    a[q, k] = s * apk + c * phc * aqk
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                if want_vectors:
                    for k in range(n):
                        akp = v[k, p]
                        akq = v[k, q]
                        v[k, p] = c * akp - s * ph * akq
                        v[k, q] = s * akp + c * ph * akq
    if _off_norm(a, n) < thresh:
        return max_sweeps
    return -1


def eigh(h, double tol=1e-14, int max_sweeps=100):
    """Eigenvalues (descending) and unitary eigenvectors of a Hermitian matrix."""
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] a = np.array(h, dtype=np.complex128, order="C", copy=True)
    cdef Py_ssize_t n = a.shape[0]
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] v = np.eye(n, dtype=np.complex128)
    cdef cplx[:, :] av = a
    cdef cplx[:, :] vv = v
    cdef int status
    with nogil:
        status = _jacobi_inplace(av, vv, True, tol, max_sweeps)
    if status < 0:
        raise ArithmeticError("Jacobi iteration did not converge")
    w = np.real(np.diagonal(a)).copy()
    order = np.argsort(-w, kind="stable")
    return w[order], v[:, order]


def eigvalsh_batch(stack, double tol=1e-14, int max_sweeps=100):
    """Descending eigenvalues of every matrix in an ``(B, n, n)`` stack."""
    cdef cnp.ndarray[cnp.complex128_t, ndim=3] a = np.array(stack, dtype=np.complex128, order="C", copy=True)
    cdef Py_ssize_t b = a.shape[0]
    cdef Py_ssize_t n = a.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((b, n), dtype=np.float64)
    cdef cplx[:, :, :] av = a
    cdef double[:, :] ov = out
    cdef cplx[:, :] dummy = np.zeros((1, 1), dtype=np.complex128)
    cdef Py_ssize_t i, k
    cdef int status = 0
    with nogil:
        for i in range(b):
            if _jacobi_inplace(av[i], dummy, False, tol, max_sweeps) < 0:
                status = -1
            for k in range(n):
                ov[i, k] = av[i, k, k].real
    if status < 0:
        raise ArithmeticError("Jacobi iteration did not converge")
    out.sort(axis=1)
    return out[:, ::-1].copy()
