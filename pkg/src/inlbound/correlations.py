"""Multipartite correlations p(a_1 ... a_M | x_1 ... x_M) and their extensions.

Tables are stored as arrays of shape ``output_sizes + input_sizes``; flattening
in C order gives the serialization order (a_1 slowest, x_M fastest).
"""

import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .cq import CqState
from .infotheory import conditional_mutual_information
from .qmat import DensityMatrix, Povm, StateError, purify

ROW_TOL = 1e-10
CLAMP_TOL = 1e-12
MARGINAL_NS_TOL = 1e-8


class CorrelationError(ValueError):
    pass


class Correlation:
    """Conditional probability table of an ``M``-party box.

    Args:
        table: array of shape ``output_sizes + input_sizes`` or a flat array
            together with the two size lists.
    """

    def __init__(self, table, output_sizes=None, input_sizes=None):
        t = np.array(table, dtype=float)
        if output_sizes is None or input_sizes is None:
            if t.ndim % 2 or t.ndim < 4:
                raise CorrelationError("give output_sizes and input_sizes for a flat table")
            m = t.ndim // 2
            output_sizes, input_sizes = t.shape[:m], t.shape[m:]
        output_sizes = tuple(int(k) for k in output_sizes)
        input_sizes = tuple(int(k) for k in input_sizes)
        if len(output_sizes) != len(input_sizes) or len(output_sizes) < 2:
            raise CorrelationError("need M >= 2 parties with one output and one input size each")
        if min(output_sizes + input_sizes) < 1:
            raise CorrelationError("alphabet sizes must be positive")
        if t.size != math.prod(output_sizes) * math.prod(input_sizes):
            raise CorrelationError(f"table has {t.size} entries, sizes need "
                                   f"{math.prod(output_sizes) * math.prod(input_sizes)}")
        t = t.reshape(output_sizes + input_sizes)
        if not np.all(np.isfinite(t)):
            raise CorrelationError("table contains non-finite entries")
        if t.min() < -CLAMP_TOL:
            raise CorrelationError(f"negative probability {t.min():.3g}")
        m = len(output_sizes)
        out_axes = tuple(range(m))
        if t.min() < 0:
            t = np.where(t < 0, 0.0, t)
            t = t / t.sum(axis=out_axes, keepdims=True)
        sums = t.sum(axis=out_axes)
        bad = np.max(np.abs(sums - 1.0))
        if bad > ROW_TOL:
            x = np.unravel_index(int(np.argmax(np.abs(sums - 1.0))), sums.shape)
            raise CorrelationError(f"probabilities for inputs {tuple(map(int, x))} sum to {sums[x]!r}")
        t.setflags(write=False)
        self.table = t
        self.output_sizes = output_sizes
        self.input_sizes = input_sizes

    @property
    def num_parties(self):
        return len(self.output_sizes)

    def conditional(self, inputs):
        """Output distribution for one input tuple, shape ``output_sizes``."""
        idx = (slice(None),) * self.num_parties + tuple(int(x) for x in inputs)
        return self.table[idx]

    def prob(self, outputs, inputs):
        return float(self.table[tuple(outputs) + tuple(inputs)])

    def input_tuples(self):
        return itertools.product(*(range(k) for k in self.input_sizes))

    def output_tuples(self):
        return itertools.product(*(range(k) for k in self.output_sizes))

    def same_shape(self, other):
        return self.output_sizes == other.output_sizes and self.input_sizes == other.input_sizes

    def __repr__(self):
        return f"Correlation(outputs={self.output_sizes}, inputs={self.input_sizes})"

    # ------------------------------------------------------------ construction

    @classmethod
    def uniform(cls, output_sizes, input_sizes):
        shape = tuple(output_sizes) + tuple(input_sizes)
        return cls(np.full(shape, 1.0 / math.prod(output_sizes)))

    @classmethod
    def deterministic(cls, strategies, output_sizes, input_sizes):
        """Box where party ``i`` outputs ``strategies[i][x_i]``."""
        t = np.zeros(tuple(output_sizes) + tuple(input_sizes))
        for x in itertools.product(*(range(k) for k in input_sizes)):
            a = tuple(strategies[i][xi] for i, xi in enumerate(x))
            t[a + x] = 1.0
        return cls(t)

    @classmethod
    def product(cls, factors):
        """Independent boxes ``p(a_1|x_1) ... p(a_M|x_M)``; each factor has shape (out, in)."""
        m = len(factors)
        t = np.ones(())
        for f in factors:
            t = np.multiply.outer(t, np.asarray(f, dtype=float))
        # axes are (a1, x1, a2, x2, ...); regroup to outputs then inputs
        order = [2 * i for i in range(m)] + [2 * i + 1 for i in range(m)]
        return cls(np.transpose(t, order))

    # -------------------------------------------------------------------- json

    def to_json(self):
        header = json.dumps({
            "num_parties": self.num_parties,
            "output_sizes": list(self.output_sizes),
            "input_sizes": list(self.input_sizes),
        })
        table = ", ".join(format(float(v), ".17g") for v in self.table.ravel())
        return header[:-1] + f', "table": [{table}]}}'

    @classmethod
    def from_json(cls, text):
        data = json.loads(text)
        return cls.from_dict(data)

    @classmethod
    def from_dict(cls, data):
        try:
            m = int(data["num_parties"])
            outs, ins = list(data["output_sizes"]), list(data["input_sizes"])
            table = data["table"]
        except (KeyError, TypeError, ValueError) as exc:
            raise CorrelationError(f"malformed correlation object: {exc}") from exc
        if len(outs) != m or len(ins) != m:
            raise CorrelationError("num_parties disagrees with the size lists")
        return cls(np.asarray(table, dtype=float), outs, ins)

    def save(self, path):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_json() + "\n")

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(fh.read())


# -------------------------------------------------------------- quantum boxes

def _check_povms(state, povms):
    if len(povms) != len(state.dims):
        raise CorrelationError(f"{len(povms)} parties of POVMs for a {len(state.dims)}-system state")
    for i, (plist, d) in enumerate(zip(povms, state.dims)):
        if not plist:
            raise CorrelationError(f"party {i} has no measurement settings")
        for x, povm in enumerate(plist):
            if not isinstance(povm, Povm):
                raise CorrelationError(f"party {i} setting {x} is not a Povm")
            if povm.dim != d:
                raise CorrelationError(f"party {i} setting {x} acts on dim {povm.dim}, subsystem has {d}")
        if len({len(p) for p in plist}) != 1:
            raise CorrelationError(f"party {i} settings have different outcome counts")


def _joint_effects(povms, inputs):
    """Iterate ``(outputs, effect)`` for the product measurement at ``inputs``."""
    chosen = [povms[i][x] for i, x in enumerate(inputs)]
    for a in itertools.product(*(range(len(p)) for p in chosen)):
        op = chosen[0][a[0]]
        for i in range(1, len(chosen)):
            op = np.kron(op, chosen[i][a[i]])
        yield a, op


def from_state_and_povms(state, povms):
    """``p(a|x) = Tr[(Pi^{x_1}_{a_1} x ... x Pi^{x_M}_{a_M}) rho]``.

    Args:
        state: ``DensityMatrix`` whose dims are the parties' subsystems.
        povms: per party, a list of ``Povm`` indexed by input.
    """
    _check_povms(state, povms)
    outs = tuple(len(p[0]) for p in povms)
    ins = tuple(len(p) for p in povms)
    t = np.zeros(outs + ins)
    rho_t = state.matrix.T
    for x in itertools.product(*(range(k) for k in ins)):
        for a, op in _joint_effects(povms, x):
            # Tr[op rho] = sum(op * rho^T)
            t[a + x] = np.real(np.sum(op * rho_t))
    t[np.abs(t) < 1e-15] = 0.0
    return Correlation(t)


# ------------------------------------------------------------- no-signaling

@dataclass
class NoSignalingReport:
    passed: bool
    worst_violation: float
    party: int = None
    context: dict = field(default_factory=dict)

    def __str__(self):
        status = "PASS" if self.passed else "FAIL"
        where = ""
        if self.party is not None:
            where = f" (party {self.party}, {self.context})"
        return f"no-signaling {status}: worst violation {self.worst_violation:.3e}{where}"


def check_no_signaling(p, tol=1e-10):
    """Check that no party's input changes the others' joint marginal.

    For each party ``i`` the marginal obtained by summing ``a_i`` must not
    depend on ``x_i`` for any fixing of the remaining outputs and inputs.
    """
    m = p.num_parties
    worst, where = 0.0, (None, {})
    for i in range(m):
        marg = p.table.sum(axis=i)  # axes: other outputs, then all inputs
        x_axis = m - 1 + i
        spread = marg.max(axis=x_axis) - marg.min(axis=x_axis)
        v = float(spread.max()) if spread.size else 0.0
        if v > worst:
            idx = np.unravel_index(int(np.argmax(spread)), spread.shape)
            others = [j for j in range(m) if j != i]
            ctx = {
                "outputs": {f"a{j}": int(idx[k]) for k, j in enumerate(others)},
                "inputs": {f"x{j}": int(idx[m - 1 + k]) for k, j in enumerate(others)},
            }
            worst, where = v, (i, ctx)
    return NoSignalingReport(worst <= tol, worst, where[0], where[1])


def _uniform_inputs(p):
    return np.full(p.input_sizes, 1.0 / math.prod(p.input_sizes))


def nosignaling_via_cmi(p, q_inputs=None):
    """``I(X_i; A_{others} | X_{others})`` for every party ``i``.

    Keys are strings such as ``"I(X1;A2A3|X2X3)"`` (parties numbered from 1).
    All values vanish exactly when ``p`` is no-signaling and ``q_inputs`` has
    full support.
    """
    q = _uniform_inputs(p) if q_inputs is None else np.asarray(q_inputs, dtype=float).reshape(p.input_sizes)
    s = embed_cq(p, q)
    m = p.num_parties
    out = {}
    for i in range(m):
        others = [j for j in range(m) if j != i]
        a_others = [f"A{j + 1}" for j in others]
        x_others = [f"X{j + 1}" for j in others]
        key = f"I(X{i + 1};{''.join(a_others)}|{''.join(x_others)})"
        out[key] = conditional_mutual_information(s, f"X{i + 1}", a_others, x_others)
    return out


def marginal(p, parties):
    """Correlation of the listed parties, dropping the others' inputs.

    Raises:
        CorrelationError: if ``p`` signals beyond ``1e-8``.
    """
    parties = list(parties)
    if not parties:
        raise CorrelationError("marginal needs at least one party")
    if len(set(parties)) != len(parties) or min(parties) < 0 or max(parties) >= p.num_parties:
        raise CorrelationError(f"invalid party list {parties}")
    report = check_no_signaling(p, MARGINAL_NS_TOL)
    if not report.passed:
        raise CorrelationError(f"marginal undefined for a signaling box: {report}")
    m = p.num_parties
    drop = [j for j in range(m) if j not in parties]
    t = p.table.sum(axis=tuple(drop))
    # fix dropped inputs to 0; remaining axes are kept outputs then all inputs
    idx = [slice(None)] * (m - len(drop)) + [0 if j in drop else slice(None) for j in range(m)]
    t = t[tuple(idx)]
    # reorder to the requested party order
    kept_sorted = sorted(parties)
    perm = [kept_sorted.index(j) for j in parties]
    k = len(parties)
    t = np.transpose(t, perm + [k + q for q in perm])
    if k == 1:
        return _SinglePartyBox(t)
    return Correlation(t)


class _SinglePartyBox:
    """One-party marginal ``p(a|x)``; exposes ``table`` only."""

    def __init__(self, table):
        self.table = table
        self.output_sizes = (table.shape[0],)
        self.input_sizes = (table.shape[1],)
        self.num_parties = 1


def mix(t, r, lam):
    """``lam * t + (1 - lam) * r``."""
    if not 0.0 <= lam <= 1.0:
        raise CorrelationError(f"lambda must lie in [0, 1], got {lam}")
    if not t.same_shape(r):
        raise CorrelationError("cannot mix correlations of different shapes")
    return Correlation(lam * t.table + (1 - lam) * r.table)


# -------------------------------------------------------------------- LOCR

def _stochastic(arr, axis, name):
    arr = np.asarray(arr, dtype=float)
    if np.any(arr < -1e-12) or np.max(np.abs(arr.sum(axis=axis) - 1.0)) > 1e-10:
        raise CorrelationError(f"{name} is not a conditional distribution")
    return arr


@dataclass
class Wiring:
    """Local pre/post-processing with shared randomness.

    Attributes:
        input_boxes: per party, array ``I[l1, xf, x]`` = I_i(x | x_f, lambda1).
        output_boxes: per party, array ``O[l2, x, xf, a, af]`` =
            O_i(a_f | a, x, x_f, lambda2).
        lambda1_dist, lambda2_dist: distributions of the shared randomness.
    """

    input_boxes: list
    output_boxes: list
    lambda1_dist: np.ndarray = None
    lambda2_dist: np.ndarray = None

    def __post_init__(self):
        self.input_boxes = [_stochastic(b, -1, f"input box {i}") for i, b in enumerate(self.input_boxes)]
        self.output_boxes = [_stochastic(b, -1, f"output box {i}") for i, b in enumerate(self.output_boxes)]
        n1 = self.input_boxes[0].shape[0]
        n2 = self.output_boxes[0].shape[0]
        self.lambda1_dist = _stochastic(np.ones(n1) / n1 if self.lambda1_dist is None else self.lambda1_dist, 0, "lambda1")
        self.lambda2_dist = _stochastic(np.ones(n2) / n2 if self.lambda2_dist is None else self.lambda2_dist, 0, "lambda2")
        if any(b.shape[0] != n1 for b in self.input_boxes) or any(b.shape[0] != n2 for b in self.output_boxes):
            raise CorrelationError("boxes disagree on the shared-randomness alphabet")
        if len(self.input_boxes) != len(self.output_boxes):
            raise CorrelationError("need one input and one output box per party")

    @classmethod
    def identity(cls, p):
        ins = [np.eye(k)[None] for k in p.input_sizes]
        outs = []
        for a, x in zip(p.output_sizes, p.input_sizes):
            outs.append(np.broadcast_to(np.eye(a), (1, x, x, a, a)).copy())
        return cls(ins, outs)

    @classmethod
    def output_only(cls, p, maps):
        """Wiring that keeps the inputs and applies ``maps[i][x, a, af]`` to outputs."""
        ins = [np.eye(k)[None] for k in p.input_sizes]
        outs = []
        for m, x in zip(maps, p.input_sizes):
            m = np.asarray(m, dtype=float)
            # the map depends on the box input; x_f = x under these input boxes
            outs.append(np.broadcast_to(m[None, :, None], (1, x, x) + m.shape[1:]).copy())
        return cls(ins, outs)


_LETTERS = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"


def apply_locr(p, w):
    """``p_f(a_f|x_f) = sum O^(L)(a_f|x_f,a,x) p(a|x) I^(L)(x|x_f)``.

    ``lambda1`` and ``lambda2`` are independent; the sums over them are
    evaluated exactly.
    """
    m = p.num_parties
    if len(w.input_boxes) != m:
        raise CorrelationError(f"wiring is for {len(w.input_boxes)} parties, box has {m}")
    for i in range(m):
        ib, ob = w.input_boxes[i], w.output_boxes[i]
        if ib.shape[2] != p.input_sizes[i] or ob.shape[1] != p.input_sizes[i]:
            raise CorrelationError(f"party {i}: wiring inputs do not match the box")
        if ob.shape[3] != p.output_sizes[i] or ob.shape[2] != ib.shape[1]:
            raise CorrelationError(f"party {i}: wiring outputs do not match the box")
    if 4 * m + 1 > len(_LETTERS):
        raise CorrelationError("too many parties for the einsum layout")
    A, X, XF, AF = (_LETTERS[k * m:(k + 1) * m] for k in range(4))
    lam = _LETTERS[4 * m]

    # I^(L)(x | x_f) summed over lambda1
    spec = ",".join(f"{lam}{XF[i]}{X[i]}" for i in range(m))
    inp = np.einsum(f"{lam},{spec}->{XF}{X}", w.lambda1_dist, *w.input_boxes)
    # O^(L)(a_f | a, x, x_f) summed over lambda2
    spec = ",".join(f"{lam}{X[i]}{XF[i]}{A[i]}{AF[i]}" for i in range(m))
    outp = np.einsum(f"{lam},{spec}->{AF}{XF}{A}{X}", w.lambda2_dist, *w.output_boxes)
    t = np.einsum(f"{AF}{XF}{A}{X},{A}{X},{XF}{X}->{AF}{XF}", outp, p.table, inp)
    t[np.abs(t) < 1e-16] = 0.0
    return Correlation(t)


def random_output_wiring(rng, p, out_sizes=None, depend_on_input=True):
    """Random local output processing without shared randomness."""
    out_sizes = p.output_sizes if out_sizes is None else out_sizes
    maps = []
    for a, af, x in zip(p.output_sizes, out_sizes, p.input_sizes):
        reps = x if depend_on_input else 1
        m = rng.dirichlet(np.ones(af), size=(reps, a))
        if not depend_on_input:
            m = np.repeat(m, x, axis=0)
        maps.append(m)
    return Wiring.output_only(p, maps)


def random_wiring(rng, p, final_input_sizes=None, out_sizes=None, n_lambda1=2, n_lambda2=2):
    """Random LOCR wiring with shared randomness before and after the box."""
    final_input_sizes = p.input_sizes if final_input_sizes is None else final_input_sizes
    out_sizes = p.output_sizes if out_sizes is None else out_sizes
    ins = [rng.dirichlet(np.ones(x), size=(n_lambda1, xf)) for x, xf in zip(p.input_sizes, final_input_sizes)]
    outs = [rng.dirichlet(np.ones(af), size=(n_lambda2, x, xf, a))
            for a, af, x, xf in zip(p.output_sizes, out_sizes, p.input_sizes, final_input_sizes)]
    return Wiring(ins, outs, rng.dirichlet(np.ones(n_lambda1)), rng.dirichlet(np.ones(n_lambda2)))


# -------------------------------------------------------------- extensions

def _registers(p):
    return ([(f"A{i + 1}", k) for i, k in enumerate(p.output_sizes)]
            + [(f"X{i + 1}", k) for i, k in enumerate(p.input_sizes)])


def embed_cq(p, q_inputs=None, ext=None):
    """Classical-quantum embedding ``sum q(x) p(a|x) [a x] (x) rho_E^{a x}``.

    Args:
        q_inputs: input distribution (uniform when omitted).
        ext: optional array of shape ``output_sizes + input_sizes + (d, d)``
            or mapping ``(a, x) -> matrix``; omitted means a trivial extension.
    """
    q = _uniform_inputs(p) if q_inputs is None else np.asarray(q_inputs, dtype=float).reshape(p.input_sizes)
    if np.any(q < 0) or abs(q.sum() - 1.0) > 1e-10:
        raise CorrelationError("input distribution must be nonnegative and sum to 1")
    weights = p.table * q
    if ext is None:
        return CqState(_registers(p), weights)
    if isinstance(ext, dict):
        d = np.asarray(next(iter(ext.values()))).shape[-1]
        arr = np.zeros(p.output_sizes + p.input_sizes + (d, d), dtype=complex)
        for (a, x), rho in ext.items():
            arr[tuple(a) + tuple(x)] = rho.matrix if isinstance(rho, DensityMatrix) else rho
        ext = arr
    return CqState(_registers(p), weights, np.asarray(ext, dtype=complex))


def flag_extension(t, r, lam, q_inputs=None, ext_t=None, ext_r=None):
    """Extension of ``mix(t, r, lam)`` whose E records the branch.

    E is the direct sum of the two branch extensions, so its dimension is
    ``d_t + d_r``.
    """
    if not t.same_shape(r):
        raise CorrelationError("cannot mix correlations of different shapes")
    st = embed_cq(t, q_inputs, ext_t)
    sr = embed_cq(r, q_inputs, ext_r)
    dt, dr = st.e_dim, sr.e_dim
    bt = st.blocks()
    br = sr.blocks()
    shape = bt.shape[:-2]
    blocks = np.zeros(shape + (dt + dr, dt + dr), dtype=complex)
    blocks[..., :dt, :dt] = lam * bt
    blocks[..., dt:, dt:] = (1 - lam) * br
    return CqState.from_blocks(_registers(t), blocks)


def quantum_extension_from_purification(state, povms, q_inputs=None, purification=None):
    """Quantum extension obtained by handing E the purifying register.

    Args:
        purification: optional ``(psi, env_dim)`` to use instead of the
            minimal purification of ``state``.

    Zero-probability outcomes get weight 0 and no E-state.
    """
    _check_povms(state, povms)
    if purification is None:
        psi, d_e = purify(state)
    else:
        psi, d_e = purification
        psi = np.asarray(psi, dtype=complex).ravel()
        if psi.size != state.dim * d_e:
            raise StateError("purification has the wrong length")
        reduced = psi.reshape(state.dim, d_e)
        if np.max(np.abs(reduced @ reduced.conj().T - state.matrix)) > 1e-10:
            raise StateError("purification does not reproduce the state")
    big = psi.reshape(state.dim, d_e)
    p = from_state_and_povms(state, povms)
    blocks = np.zeros(p.output_sizes + p.input_sizes + (d_e, d_e), dtype=complex)
    for x in p.input_tuples():
        for a, op in _joint_effects(povms, x):
            # Tr_parties[(op x I)|psi><psi|] = (Psi^dagger op Psi)^T
            blocks[a + x] = (big.conj().T @ op @ big).T
    q = _uniform_inputs(p) if q_inputs is None else np.asarray(q_inputs, dtype=float).reshape(p.input_sizes)
    blocks *= q.reshape((1,) * p.num_parties + q.shape + (1, 1))
    tr = np.real(np.trace(blocks, axis1=-2, axis2=-1))
    blocks[tr < 1e-15] = 0.0
    return CqState.from_blocks(_registers(p), blocks)


def random_quantum_correlation(rng, dims=(2, 2, 2), num_inputs=2, num_outputs=2):
    """Correlation from a random state and random POVMs; returns ``(p, state, povms)``."""
    from .qmat import random_density_matrix, random_povm

    state = random_density_matrix(rng, math.prod(dims), dims=tuple(dims))
    povms = [[random_povm(rng, d, num_outputs) for _ in range(num_inputs)] for d in dims]
    return from_state_and_povms(state, povms), state, povms
