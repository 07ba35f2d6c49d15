"""Pure-Python (numpy) cyclic Jacobi eigensolver.

Same algorithm and interface as the compiled ``_jacobi`` extension. The batch
routine rotates every matrix of the stack at once for each ``(p, q)`` pair,
which keeps the interpreter overhead independent of the batch size.
"""

import numpy as np


def _rotate(a, v, p, q):
    """Apply one Jacobi rotation in the (p, q) plane to a stack ``a``."""
    apq = a[:, p, q]
    r = np.abs(apq)
    active = r > 1e-300
    if not active.any():
        return
    safe_r = np.where(active, r, 1.0)
    ph = np.where(active, np.conj(apq) / safe_r, 1.0)  # e^{-i phi}
    tau = (a[:, q, q].real - a[:, p, p].real) / (2.0 * safe_r)
    t = np.sign(tau) / (np.abs(tau) + np.hypot(1.0, tau))
    t = np.where(tau == 0, 1.0, t)
    t = np.where(active, t, 0.0)
    c = 1.0 / np.sqrt(1.0 + t * t)
    s = t * c

    cc = c[:, None]
    ss = s[:, None]
    phv = ph[:, None]
    col_p = a[:, :, p].copy()
    col_q = a[:, :, q]
    a[:, :, p] = cc * col_p - ss * phv * col_q
    a[:, :, q] = ss * col_p + cc * phv * col_q
    row_p = a[:, p, :].copy()
    row_q = a[:, q, :]
    a[:, p, :] = cc * row_p - ss * np.conj(phv) * row_q
    a[:, q, :] = ss * row_p + cc * np.conj(phv) * row_q
    a[active, p, q] = 0.0
    a[active, q, p] = 0.0
    a[:, p, p] = a[:, p, p].real
    a[:, q, q] = a[:, q, q].real
    if v is not None:
        vp = v[:, :, p].copy()
        vq = v[:, :, q]
        v[:, :, p] = cc * vp - ss * phv * vq
        v[:, :, q] = ss * vp + cc * phv * vq


def _off_norms(a):
    n = a.shape[-1]
    mask = ~np.eye(n, dtype=bool)
    return np.sqrt(np.sum(np.abs(a[:, mask]) ** 2, axis=1))


def _jacobi_stack(a, v, tol, max_sweeps):
    n = a.shape[-1]
    scale = np.sqrt(np.sum(np.abs(a) ** 2, axis=(1, 2)))
    thresh = tol * np.maximum(scale, 1.0)
    for _ in range(max_sweeps):
        if np.all(_off_norms(a) < thresh):
            return
        for p in range(n - 1):
            for q in range(p + 1, n):
                _rotate(a, v, p, q)
    if not np.all(_off_norms(a) < thresh):
        raise ArithmeticError("Jacobi iteration did not converge")


def eigh(h, tol=1e-14, max_sweeps=100):
    """Eigenvalues (descending) and unitary eigenvectors of a Hermitian matrix."""
    a = np.array(h, dtype=np.complex128)[None].copy()
    n = a.shape[-1]
    v = np.eye(n, dtype=np.complex128)[None].copy()
    _jacobi_stack(a, v, tol, max_sweeps)
    w = np.real(np.diagonal(a[0])).copy()
    order = np.argsort(-w, kind="stable")
    return w[order], v[0][:, order]


def eigvalsh_batch(stack, tol=1e-14, max_sweeps=100):
    """Descending eigenvalues of every matrix in an ``(B, n, n)`` stack."""
    a = np.array(stack, dtype=np.complex128).copy()
    if a.shape[0] == 0:
        return np.zeros((0, a.shape[-1]))
    _jacobi_stack(a, None, tol, max_sweeps)
    w = np.real(np.diagonal(a, axis1=1, axis2=2)).copy()
    w.sort(axis=1)
    return w[:, ::-1].copy()
