import numpy as np
import pytest

from inlbound import kernels

BACKENDS = kernels.available_backends()


def random_hermitian(rng, n):
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (g + g.conj().T) / 2


@pytest.fixture(params=BACKENDS)
def backend(request):
    return kernels.get_module(request.param)


@pytest.mark.parametrize("n", [1, 2, 3, 8, 17, 64])
def test_eigh_matches_lapack(backend, n):
    rng = np.random.default_rng(n)
    h = random_hermitian(rng, n)
    w, v = backend.eigh(h)
    np.testing.assert_allclose(np.sort(w), np.linalg.eigvalsh(h), atol=1e-11)
    assert np.all(np.diff(w) <= 1e-12)  # descending
    np.testing.assert_allclose(v.conj().T @ v, np.eye(n), atol=1e-11)
    np.testing.assert_allclose(h @ v, v * w, atol=1e-10)


def test_degenerate_and_diagonal(backend):
    h = np.diag([2.0, 2.0, -1.0, 0.0]).astype(complex)
    w, v = backend.eigh(h)
    np.testing.assert_allclose(w, [2, 2, 0, -1], atol=1e-14)
    u = np.linalg.qr(np.random.default_rng(0).normal(size=(4, 4)))[0]
    w2, _ = backend.eigh(u @ h @ u.T)
    np.testing.assert_allclose(w2, [2, 2, 0, -1], atol=1e-12)


def test_zero_matrix(backend):
    w, v = backend.eigh(np.zeros((3, 3), dtype=complex))
    np.testing.assert_allclose(w, 0)
    np.testing.assert_allclose(v, np.eye(3))


def test_batch(backend):
    rng = np.random.default_rng(5)
    stack = np.array([random_hermitian(rng, 4) for _ in range(7)])
    w = backend.eigvalsh_batch(stack)
    assert w.shape == (7, 4)
    for k in range(7):
        np.testing.assert_allclose(np.sort(w[k]), np.linalg.eigvalsh(stack[k]), atol=1e-12)


def test_nonconvergence_raises(backend):
    h = random_hermitian(np.random.default_rng(1), 6)
    with pytest.raises(ArithmeticError):
        backend.eigh(h, 1e-14, 0)


def test_backends_agree():
    if len(BACKENDS) < 2:
        pytest.skip("compiled extension not built")
    rng = np.random.default_rng(9)
    h = random_hermitian(rng, 12)
    wa, _ = kernels.get_module("compiled").eigh(h)
    wb, _ = kernels.get_module("python").eigh(h)
    np.testing.assert_allclose(wa, wb, atol=1e-12)


def test_set_backend_roundtrip():
    prev = kernels.set_backend("python")
    try:
        assert kernels.BACKEND == "python"
        w, _ = kernels.eigh(np.diag([1.0, 3.0]).astype(complex))
        np.testing.assert_allclose(w, [3, 1])
    finally:
        kernels.set_backend(prev)
    with pytest.raises(ValueError):
        kernels.set_backend("fortran")
