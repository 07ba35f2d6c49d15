"""Classical-quantum states: named classical registers plus an E register.

A ``CqState`` stores, for every joint classical value ``v``, the unnormalized
block ``w(v) * rho_E^v``. All entropies are assembled from these blocks
without forming the exponentially large joint matrix: the entropy of a set of
classical registers together with E is the entropy of the spectrum of all
marginal blocks, which equals ``H(weights) + sum_v w(v) S(rho_E^v)``.
"""

import math

import numpy as np

from . import kernels
from .qmat import EIG_CLAMP, DensityMatrix, StateError, entropy_of_spectrum

WEIGHT_TOL = 1e-10


class CqState:
    """Joint distribution over named classical registers with E-states.

    Args:
        registers: ordered ``(name, size)`` pairs.
        weights: array of shape ``sizes``, summing to one.
        e_states: array of shape ``sizes + (d, d)``; ``None`` means a trivial
            (one-dimensional) E. Entries with zero weight are ignored.
    """

    def __init__(self, registers, weights, e_states=None, validate=True):
        registers = [(str(n), int(k)) for n, k in registers]
        names = tuple(n for n, _ in registers)
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate register names in {names}")
        self.names = names
        self.sizes = tuple(k for _, k in registers)
        w = np.asarray(weights, dtype=float).reshape(self.sizes)
        if e_states is None:
            e = np.ones(self.sizes + (1, 1), dtype=complex)
        else:
            e = np.asarray(e_states, dtype=complex)
            if e.shape[:-2] != self.sizes or e.ndim != len(self.sizes) + 2 or e.shape[-1] != e.shape[-2]:
                raise StateError(f"e_states shape {e.shape} incompatible with sizes {self.sizes}")
        if validate:
            _validate(w, e)
        self.weights = w
        self.e_dim = e.shape[-1]
        blocks = w[..., None, None] * e
        blocks[w <= 0] = 0.0
        self._blocks = blocks
        self._cache = {}

    # ------------------------------------------------------------------ access

    @property
    def registers(self):
        return tuple(zip(self.names, self.sizes))

    def size_of(self, name):
        return self.sizes[self._axis(name)]

    def _axis(self, name):
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"unknown register {name!r}; have {self.names}") from None

    @property
    def e_states(self):
        """Normalized E-states (zero matrices where the weight vanishes)."""
        w = self.weights[..., None, None]
        with np.errstate(invalid="ignore", divide="ignore"):
            e = np.where(w > 0, self._blocks / np.where(w > 0, w, 1.0), 0.0)
        return e

    def blocks(self):
        return self._blocks.copy()

    def e_state(self, values):
        """E-state for one joint classical value, or ``None`` if it has zero weight."""
        w = self.weights[tuple(values)]
        if w <= 0:
            return None
        return DensityMatrix(self._blocks[tuple(values)] / w, validate=False)

    def __repr__(self):
        regs = ", ".join(f"{n}:{k}" for n, k in self.registers)
        return f"CqState([{regs}], e_dim={self.e_dim})"

    # --------------------------------------------------------------- entropies

    def entropy(self, names=(), with_e=False):
        """Entropy in bits of the listed classical registers, optionally with E."""
        key = (frozenset(names), bool(with_e))
        if key not in self._cache:
            self._cache[key] = self._entropy(key[0], key[1])
        return self._cache[key]

    def _entropy(self, names, with_e):
        keep = sorted(self._axis(n) for n in names)
        drop = tuple(i for i in range(len(self.names)) if i not in keep)
        b = self._blocks.sum(axis=drop) if drop else self._blocks
        d = self.e_dim
        b = b.reshape(-1, d, d)
        if not with_e or d == 1:
            return entropy_of_spectrum(np.real(np.trace(b, axis1=1, axis2=2)))
        traces = np.real(np.trace(b, axis1=1, axis2=2))
        b = b[traces > EIG_CLAMP]
        if len(b) == 0:
            return 0.0
        return entropy_of_spectrum(kernels.eigvalsh_batch(b))

    # ------------------------------------------------------------- transforms

    def marginal(self, names):
        """Keep only the listed classical registers (E is kept)."""
        keep = [self._axis(n) for n in names]
        drop = tuple(i for i in range(len(self.names)) if i not in keep)
        b = self._blocks.sum(axis=drop) if drop else self._blocks
        remaining = [i for i in range(len(self.names)) if i in keep]
        order = [remaining.index(k) for k in keep]
        b = np.moveaxis(b, order, list(range(len(order))))
        return self._from_blocks([(self.names[k], self.sizes[k]) for k in keep], b)

    def restrict(self, assignment):
        """Condition on fixed values of some registers, e.g. ``{"X1": 0}``.

        The fixed registers are removed and the result is renormalized.
        """
        index = []
        for i, n in enumerate(self.names):
            index.append(int(assignment[n]) if n in assignment else slice(None))
        for n in assignment:
            self._axis(n)
        b = self._blocks[tuple(index)]
        total = float(np.real(np.trace(b.reshape(-1, self.e_dim, self.e_dim), axis1=1, axis2=2)).sum())
        if total <= 0:
            raise ValueError(f"assignment {assignment} has zero probability")
        regs = [(n, k) for n, k in self.registers if n not in assignment]
        return self._from_blocks(regs, b / total)

    def apply_classical_channel(self, name, channel):
        """Push one register through a stochastic matrix ``channel[new, old]``."""
        ax = self._axis(name)
        channel = np.asarray(channel, dtype=float)
        if channel.shape[1] != self.sizes[ax]:
            raise ValueError(f"channel expects {channel.shape[1]} inputs, register has {self.sizes[ax]}")
        if np.any(channel < -1e-12) or np.max(np.abs(channel.sum(axis=0) - 1)) > WEIGHT_TOL:
            raise ValueError("channel is not column-stochastic")
        b = np.tensordot(channel.astype(complex), self._blocks, axes=([1], [ax]))
        b = np.moveaxis(b, 0, ax)
        regs = list(self.registers)
        regs[ax] = (name, channel.shape[0])
        return self._from_blocks(regs, b)

    def map_e(self, fn):
        """Apply a channel to every E-block; ``fn`` maps (B, d, d) -> (B, d', d')."""
        d = self.e_dim
        flat = self._blocks.reshape(-1, d, d)
        out = np.asarray(fn(flat))
        return self._from_blocks(self.registers, out.reshape(self.sizes + out.shape[-2:]))

    def product(self, other):
        """Tensor product; register names must be disjoint, E registers combine."""
        clash = set(self.names) & set(other.names)
        if clash:
            raise ValueError(f"register names overlap: {sorted(clash)}")
        d1, d2 = self.e_dim, other.e_dim
        a = self._blocks.reshape(self.sizes + (1,) * len(other.sizes) + (d1, 1, d1, 1))
        b = other._blocks.reshape((1,) * len(self.sizes) + other.sizes + (1, d2, 1, d2))
        blocks = (a * b).reshape(self.sizes + other.sizes + (d1 * d2, d1 * d2))
        return self._from_blocks(self.registers + other.registers, blocks)

    def rename(self, mapping):
        regs = [(mapping.get(n, n), k) for n, k in self.registers]
        return self._from_blocks(regs, self._blocks)

    def to_density_matrix(self):
        """Full block-diagonal joint matrix (classical registers slow, E fast)."""
        d = self.e_dim
        flat = self._blocks.reshape(-1, d, d)
        n = flat.shape[0]
        out = np.zeros((n * d, n * d), dtype=complex)
        for k in range(n):
            out[k * d:(k + 1) * d, k * d:(k + 1) * d] = flat[k]
        return DensityMatrix(out, self.sizes + (d,), validate=False)

    def trace_distance(self, other):
        if self.registers != other.registers or self.e_dim != other.e_dim:
            raise ValueError("trace distance needs matching registers and E dimension")
        diff = (self._blocks - other._blocks).reshape(-1, self.e_dim, self.e_dim)
        if self.e_dim == 1:
            return float(0.5 * np.abs(diff[:, 0, 0].real).sum())
        return float(0.5 * np.abs(kernels.eigvalsh_batch(diff)).sum())

    @classmethod
    def _from_blocks(cls, registers, blocks):
        obj = cls.__new__(cls)
        obj.names = tuple(n for n, _ in registers)
        obj.sizes = tuple(int(k) for _, k in registers)
        blocks = np.asarray(blocks, dtype=complex).reshape(obj.sizes + blocks.shape[-2:])
        obj.e_dim = blocks.shape[-1]
        obj.weights = np.real(np.trace(blocks, axis1=-2, axis2=-1)).copy()
        obj.weights[obj.weights < 0] = 0.0
        obj._blocks = blocks
        obj._cache = {}
        return obj

    @classmethod
    def from_blocks(cls, registers, blocks, validate=True):
        """Build from unnormalized blocks ``w(v) * rho_E^v``."""
        obj = cls._from_blocks(registers, blocks)
        if validate:
            _validate(obj.weights, obj.e_states, zero_ok=True)
        return obj


def _validate(w, e, zero_ok=False):
    if np.any(w < -1e-12):
        raise StateError(f"negative weight {w.min():.3g}")
    total = w.sum()
    if abs(total - 1.0) > WEIGHT_TOL:
        raise StateError(f"weights sum to {total!r}, not 1")
    d = e.shape[-1]
    live = e[w > 0].reshape(-1, d, d)
    if len(live) == 0:
        return
    herm = np.max(np.abs(live - np.conj(np.swapaxes(live, -1, -2))))
    if herm > 1e-10:
        raise StateError(f"E-state not Hermitian (deviation {herm:.3g})")
    tr = np.real(np.trace(live, axis1=1, axis2=2))
    if np.max(np.abs(tr - 1.0)) > 1e-10:
        raise StateError("E-state trace differs from 1")
    if d > 1 and kernels.eigvalsh_batch(live)[:, -1].min() < -1e-10:
        raise StateError("E-state has a negative eigenvalue")


def random_cq_state(rng, registers, e_dim=1, rank=None):
    """Random weights (Dirichlet) and Ginibre E-states of the given rank."""
    sizes = tuple(k for _, k in registers)
    n = math.prod(sizes)
    w = rng.dirichlet(np.ones(n))
    if e_dim == 1:
        return CqState(registers, w.reshape(sizes))
    rank = e_dim if rank is None else rank
    g = rng.normal(size=(n, e_dim, rank)) + 1j * rng.normal(size=(n, e_dim, rank))
    e = g @ np.conj(np.swapaxes(g, 1, 2))
    e /= np.real(np.trace(e, axis1=1, axis2=2))[:, None, None]
    return CqState(registers, w.reshape(sizes), e.reshape(sizes + (e_dim, e_dim)))
