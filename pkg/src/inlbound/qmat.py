"""Dense complex matrix core: states, POVMs, partial trace, entropies.

Matrices are plain ``numpy`` complex arrays. ``DensityMatrix`` pairs one with
its ordered subsystem dimensions and validates on construction; instances are
treated as immutable.
"""

import math

import numpy as np

from . import kernels

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-10
EIG_CLAMP = 1e-12

I2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


class StateError(ValueError):
    """Raised for matrices that are not valid states, POVMs or observables."""


def _max_dev_from_hermitian(m):
    return float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0


class DensityMatrix:
    """Unit-trace positive semidefinite Hermitian matrix on ``prod(dims)``.

    Args:
        matrix: square array-like.
        dims: subsystem dimensions; defaults to a single system.
        validate: skip the eigenvalue check only for matrices already known to
            be states (internal use).
    """

    __slots__ = ("matrix", "dims")

    def __init__(self, matrix, dims=None, validate=True):
        m = np.array(matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise StateError(f"density matrix must be square, got shape {m.shape}")
        dims = (m.shape[0],) if dims is None else tuple(int(d) for d in dims)
        if math.prod(dims) != m.shape[0]:
            raise StateError(f"dims {dims} do not match side {m.shape[0]}")
        if validate:
            dev = _max_dev_from_hermitian(m)
            if dev > HERMITIAN_TOL:
                raise StateError(f"not Hermitian (max deviation {dev:.3g})")
            tr = np.trace(m).real
            if abs(tr - 1.0) > TRACE_TOL:
                raise StateError(f"trace {tr!r} differs from 1")
            lowest = hermitian_eig(m)[0][-1]
            if lowest < -PSD_TOL:
                raise StateError(f"negative eigenvalue {lowest:.3g}")
        m = (m + m.conj().T) / 2
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "dims", dims)

    def __setattr__(self, name, value):
        raise AttributeError("DensityMatrix is immutable")

    @property
    def dim(self):
        return self.matrix.shape[0]

    def __repr__(self):
        return f"DensityMatrix(dims={self.dims})"

    @classmethod
    def from_vector(cls, psi, dims=None):
        psi = np.asarray(psi, dtype=complex).ravel()
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()), dims)

    @classmethod
    def maximally_mixed(cls, dims):
        d = math.prod(dims)
        return cls(np.eye(d) / d, dims)


class Povm:
    """Indexed family of effects on one subsystem, summing to the identity."""

    __slots__ = ("effects",)

    def __init__(self, effects, tol=PSD_TOL):
        effects = [np.array(e, dtype=complex) for e in effects]
        if not effects:
            raise StateError("POVM needs at least one effect")
        d = effects[0].shape[0]
        for k, e in enumerate(effects):
            if e.shape != (d, d):
                raise StateError(f"effect {k} has shape {e.shape}, expected {(d, d)}")
            if _max_dev_from_hermitian(e) > tol:
                raise StateError(f"effect {k} is not Hermitian")
            w = hermitian_eig(e)[0]
            if w[-1] < -tol or w[0] > 1 + tol:
                raise StateError(f"effect {k} has eigenvalues outside [0, 1]")
        total = sum(effects)
        if np.max(np.abs(total - np.eye(d))) > tol:
            raise StateError("effects do not sum to the identity")
        for e in effects:
            e.setflags(write=False)
        self.effects = tuple(effects)

    @property
    def dim(self):
        return self.effects[0].shape[0]

    def __len__(self):
        return len(self.effects)

    def __getitem__(self, k):
        return self.effects[k]

    @classmethod
    def from_observable(cls, obs):
        """Projective two-outcome POVM of a ±1-valued observable.

        Outcome 0 is the +1 eigenspace, outcome 1 the -1 eigenspace.
        """
        obs = np.asarray(obs, dtype=complex)
        d = obs.shape[0]
        return cls([(np.eye(d) + obs) / 2, (np.eye(d) - obs) / 2])


def tensor(a, b):
    """Kronecker product, ``a``'s indices slow and ``b``'s fast.

    Two ``DensityMatrix`` arguments give a ``DensityMatrix`` with
    concatenated dims; anything else is treated as a plain matrix.
    """
    if isinstance(a, DensityMatrix) and isinstance(b, DensityMatrix):
        return DensityMatrix(np.kron(a.matrix, b.matrix), a.dims + b.dims, validate=False)
    return np.kron(np.asarray(a), np.asarray(b))


def partial_trace(rho, keep):
    """Reduce ``rho`` to the subsystems in ``keep`` (original relative order)."""
    keep = sorted(set(int(k) for k in keep))
    n = len(rho.dims)
    if not keep:
        raise ValueError("empty keep set: use np.trace for the full trace")
    if keep[0] < 0 or keep[-1] >= n:
        raise ValueError(f"keep indices {keep} out of range for {n} subsystems")
    if len(keep) == n:
        return rho
    dims = rho.dims
    t = rho.matrix.reshape(dims + dims)
    drop = [i for i in range(n) if i not in keep]
    # trace pairs from the highest index down so axis numbers stay valid
    for count, i in enumerate(sorted(drop, reverse=True)):
        remaining = n - count
        t = np.trace(t, axis1=i, axis2=i + remaining)
    d_keep = math.prod(dims[i] for i in keep)
    return DensityMatrix(t.reshape(d_keep, d_keep), tuple(dims[i] for i in keep), validate=False)


def hermitian_eig(h, tol=1e-10):
    """Eigenvalues in descending order and unitary eigenvectors (columns).

    Raises:
        StateError: if ``h`` deviates from Hermitian by more than ``tol``.
    """
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise StateError(f"expected a square matrix, got shape {h.shape}")
    if _max_dev_from_hermitian(h) > tol:
        raise StateError("matrix is not Hermitian")
    if h.shape[0] == 1:
        return np.array([h[0, 0].real]), np.ones((1, 1), dtype=complex)
    return kernels.eigh((h + h.conj().T) / 2)


def entropy_of_spectrum(eigenvalues):
    """Shannon/von Neumann entropy in bits; values below the clamp count as 0."""
    w = np.asarray(eigenvalues, dtype=float).ravel()
    w = w[w > EIG_CLAMP]
    return float(-np.sum(w * np.log2(w)))


def von_neumann_entropy(rho):
    if not isinstance(rho, DensityMatrix):
        rho = DensityMatrix(rho)
    if rho.dim == 1:
        return 0.0
    return entropy_of_spectrum(hermitian_eig(rho.matrix)[0])


def trace_distance(rho, sigma):
    """Half the trace norm of ``rho - sigma``."""
    if rho.dims != sigma.dims:
        raise ValueError(f"dimension mismatch: {rho.dims} vs {sigma.dims}")
    w = hermitian_eig(rho.matrix - sigma.matrix)[0]
    return float(0.5 * np.sum(np.abs(w)))


def purify(rho):
    """Minimal purification of ``rho``.

    Returns:
        (psi, env_dim): ``psi`` is a vector on ``rho.dims + (env_dim,)`` with
        the purifying register fastest; ``env_dim`` is the rank of ``rho``.
    """
    w, v = hermitian_eig(rho.matrix)
    support = w > EIG_CLAMP
    w, v = w[support], v[:, support]
    r = len(w)
    # psi = sum_k sqrt(w_k) |v_k> |k>
    psi = (v * np.sqrt(w)).reshape(rho.dim, r)
    return psi.ravel(), r


def matrix_function(h, fn):
    """Apply ``fn`` to the spectrum of a Hermitian matrix."""
    w, v = hermitian_eig(h)
    return (v * fn(w)) @ v.conj().T


def expectation(rho, op):
    return float(np.real(np.trace(rho.matrix @ op)))


def ket(bits, d=2):
    """Computational-basis vector for a digit string such as ``"010"``."""
    idx = 0
    for b in bits:
        idx = idx * d + int(b)
    v = np.zeros(d ** len(bits), dtype=complex)
    v[idx] = 1.0
    return v


def ghz_vector(m=3):
    return (ket("0" * m) + ket("1" * m)) / np.sqrt(2)


def random_density_matrix(rng, dim, rank=None, dims=None):
    """Ginibre-distributed state of the given rank (full rank by default)."""
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    m = g @ g.conj().T
    return DensityMatrix(m / np.trace(m).real, dims or (dim,))


def random_povm(rng, dim, num_outcomes=2):
    """Random full-rank POVM: ``S^{-1/2} A_k S^{-1/2}`` with ``S = sum A_k``."""
    parts = []
    for _ in range(num_outcomes):
        g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        parts.append(g @ g.conj().T)
    s_inv_half = matrix_function(sum(parts), lambda w: 1.0 / np.sqrt(w))
    effects = [s_inv_half @ a @ s_inv_half for a in parts]
    effects = [(e + e.conj().T) / 2 for e in effects]
    # push the rounding residue into the last effect
    effects[-1] = effects[-1] + (np.eye(dim) - sum(effects))
    return Povm(effects)
