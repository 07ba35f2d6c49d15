"""Eigensolver backend selection.

The compiled ``_jacobi`` extension is used when it was built; otherwise the
numpy implementation in ``_jacobi_py`` is used. ``set_backend`` switches at
runtime (benchmarks and the cross-backend tests use it).
"""

from . import _jacobi_py

try:
    from . import _jacobi as _compiled
except ImportError:  # extension not built
    _compiled = None

_BACKENDS = {"python": _jacobi_py}
if _compiled is not None:
    _BACKENDS["compiled"] = _compiled

BACKEND = "compiled" if _compiled is not None else "python"
_impl = _BACKENDS[BACKEND]


def available_backends():
    return sorted(_BACKENDS)


def set_backend(name):
    """Select ``"compiled"`` or ``"python"``; returns the previous name."""
    global BACKEND, _impl
    if name not in _BACKENDS:
        raise ValueError(f"backend {name!r} unavailable; have {available_backends()}")
    previous = BACKEND
    BACKEND = name
    _impl = _BACKENDS[name]
    return previous


def get_module(name):
    return _BACKENDS[name]


def eigh(h, tol=1e-14, max_sweeps=100):
    return _impl.eigh(h, tol, max_sweeps)


def eigvalsh_batch(stack, tol=1e-14, max_sweeps=100):
    return _impl.eigvalsh_batch(stack, tol, max_sweeps)
