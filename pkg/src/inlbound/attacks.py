"""Eavesdropper attacks on GHZ-type devices and the resulting upper bounds.

Every bound here is a (quantum) intrinsic non-locality upper bound: a fixed
extension is chosen, and the supremum over input distributions becomes a
maximum over deterministic input tuples, because with the extension fixed
``I(A_1;...;A_M | E X)`` is linear in the input distribution. The result is
scaled by ``1/(M-1)``.
"""

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

from .correlations import from_state_and_povms, quantum_extension_from_purification
from .games import bell_value_S
from .infotheory import table_total_correlations, total_correlation
from .qmat import (
    SIGMA_X,
    SIGMA_Z,
    DensityMatrix,
    Povm,
    ghz_vector,
    ket,
)

SQRT2 = math.sqrt(2.0)
# isotropic noise level at which the parity-CHSH value drops to the local bound 1
LOCAL_P = 1.0 - 1.0 / SQRT2
_SLACK = 1e-12


def _in_range(value, lo, hi, name):
    if not lo - _SLACK <= value <= hi + _SLACK:
        raise ValueError(f"{name}={value} outside [{lo}, {hi}]")
    return min(max(value, lo), hi)


@dataclass(frozen=True)
class AttackScenario:
    name: str
    parameter: float
    measurements: tuple
    extension: str  # "trivial" | "purification" | "flag"


@dataclass
class SweepResult:
    """Rows ``(parameter, S, bound)`` sorted by parameter."""

    rows: list = field(default_factory=list)
    name: str = ""

    def __post_init__(self):
        self.rows = sorted((float(a), float(b), float(c)) for a, b, c in self.rows)

    @property
    def parameters(self):
        return np.array([r[0] for r in self.rows])

    @property
    def s_values(self):
        return np.array([r[1] for r in self.rows])

    @property
    def bounds(self):
        return np.array([r[2] for r in self.rows])

    def bound_at_s(self, s):
        """Linear interpolation of the bound at Bell value ``s`` (clamped at the ends)."""
        order = np.argsort(self.s_values, kind="stable")
        return float(np.interp(s, self.s_values[order], self.bounds[order]))

    def to_csv(self, overlay=None):
        """CSV text, 12 significant digits, LF endings.

        ``overlay`` is an optional column of extra values (e.g. an external
        lower bound); ``None`` entries are left blank.
        """
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        header = ["parameter", "S", "bound"] + (["lower_bound"] if overlay is not None else [])
        w.writerow(header)
        for k, row in enumerate(self.rows):
            cells = [format(v, ".12g") for v in row]
            if overlay is not None:
                v = overlay[k]
                cells.append("" if v is None else format(v, ".12g"))
            w.writerow(cells)
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text, name=""):
        reader = csv.DictReader(io.StringIO(text))
        missing = {"parameter", "S", "bound"} - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"CSV lacks columns {sorted(missing)}")
        rows = [(float(r["parameter"]), float(r["S"]), float(r["bound"])) for r in reader]
        return cls(rows, name)


# ------------------------------------------------------------- tripartite GHZ

def ghz_state(num_parties=3):
    return DensityMatrix.from_vector(ghz_vector(num_parties), (2,) * num_parties)


def isotropic_ghz_state(p):
    """``(1 - p) |GHZ><GHZ| + p I/8``."""
    p = _in_range(p, 0.0, 1.0, "p")
    return DensityMatrix((1 - p) * ghz_state().matrix + p * np.eye(8) / 8, (2, 2, 2), validate=False)


def standard_measurements_tripartite():
    """Alice {Z, X}; Bob {(Z+X)/sqrt2, (Z-X)/sqrt2, Z}; Charlie {Z, X}."""
    P = Povm.from_observable
    return [
        [P(SIGMA_Z), P(SIGMA_X)],
        [P((SIGMA_Z + SIGMA_X) / SQRT2), P((SIGMA_Z - SIGMA_X) / SQRT2), P(SIGMA_Z)],
        [P(SIGMA_Z), P(SIGMA_X)],
    ]


KEY_INPUTS = (0, 2, 0)


@lru_cache(maxsize=1)
def _isotropic_endpoints():
    meas = standard_measurements_tripartite()
    ghz = from_state_and_povms(ghz_state(), meas).table
    noise = from_state_and_povms(DensityMatrix.maximally_mixed((2, 2, 2)), meas).table
    return ghz, noise


def isotropic_correlation(p):
    """Correlation of the isotropic GHZ family under the standard measurements."""
    return from_state_and_povms(isotropic_ghz_state(p), standard_measurements_tripartite())


def alpha_of_eps(p, eps):
    """Weight of the local endpoint when writing ``q_p`` as a mix of ``q_eps`` and ``q_local``."""
    if not (-_SLACK <= eps <= p + _SLACK and p <= LOCAL_P + _SLACK):
        raise ValueError(f"need 0 <= eps <= p <= 1 - 1/sqrt2, got eps={eps}, p={p}")
    if p >= LOCAL_P - 1e-15:
        return 1.0
    return (p - eps) / (LOCAL_P - eps)


def _max_tuple_tc(eps):
    ghz, noise = _isotropic_endpoints()
    eps = np.atleast_1d(np.asarray(eps, dtype=float))
    shape = (-1,) + (1,) * ghz.ndim
    tables = (1 - eps).reshape(shape) * ghz[None] + eps.reshape(shape) * noise[None]
    tc = table_total_correlations(tables, 3)
    return tc.reshape(len(eps), -1).max(axis=1)


def _convex_objective(p, eps):
    return (1.0 - np.array([alpha_of_eps(p, e) for e in eps])) * _max_tuple_tc(eps)


def convex_attack_bound(p, coarse_step=1e-3, fine_step=1e-5, return_eps=False):
    """Upper bound from splitting ``q_p`` into a nonlocal and a local part.

    Minimizes ``(1 - alpha(eps)) * max_x I(A;B;C)_{q_eps}`` over ``eps`` in
    ``[0, p]`` (coarse grid, then local refinement) and applies the 1/2
    prefactor.
    """
    p = _in_range(p, 0.0, LOCAL_P, "p")
    if p >= LOCAL_P - 1e-15:
        return (0.0, p) if return_eps else 0.0
    coarse = np.append(np.arange(0.0, p, coarse_step), p)
    vals = _convex_objective(p, coarse)
    k = int(np.argmin(vals))
    lo, hi = max(0.0, coarse[k] - coarse_step), min(p, coarse[k] + coarse_step)
    fine = np.append(np.arange(lo, hi, fine_step), hi)
    fvals = _convex_objective(p, fine)
    j = int(np.argmin(fvals))
    best, eps = (fvals[j], fine[j]) if fvals[j] <= vals[k] else (vals[k], coarse[k])
    bound = 0.5 * max(float(best), 0.0)
    return (bound, float(eps)) if return_eps else bound


def isotropic_p_for_s(s):
    """Isotropic noise giving parity-CHSH value ``s`` (``S = sqrt2 (1 - p)``)."""
    return min(max(1.0 - s / SQRT2, 0.0), 1.0)


def convex_attack_bound_at_s(s):
    s = _in_range(s, 0.0, SQRT2, "S")
    if s <= 1.0:
        return 0.0
    return convex_attack_bound(min(isotropic_p_for_s(s), LOCAL_P))


# ----------------------------------------------------------- collective dephasing

def dephasing_state(c):
    """GHZ under collective dephasing and the purification handed to E.

    Returns:
        ``(rho, (psi, 2))`` where ``psi`` has amplitude ``sqrt((1-C)/2)`` on
        ``GHZ- (x) |0>`` and ``sqrt((1+C)/2)`` on ``GHZ+ (x) |1>``.
    """
    c = _in_range(c, 0.0, 1.0, "C")
    plus = ghz_vector(3)
    minus = (ket("000") - ket("111")) / SQRT2
    lo, hi = math.sqrt((1 - c) / 2), math.sqrt((1 + c) / 2)
    rho = DensityMatrix(lo ** 2 * np.outer(minus, minus.conj()) + hi ** 2 * np.outer(plus, plus.conj()),
                        (2, 2, 2), validate=False)
    psi = lo * np.kron(minus, [1, 0]) + hi * np.kron(plus, [0, 1])
    return rho, (psi, 2)


def rho_e_pm(c):
    """Eve's conditional states after the key measurement."""
    c = _in_range(c, 0.0, 1.0, "C")
    off = math.sqrt(max(1 - c * c, 0.0))
    plus = 0.5 * np.array([[1 + c, off], [off, 1 - c]])
    minus = 0.5 * np.array([[1 + c, -off], [-off, 1 - c]])
    return plus, minus


def noisy_povm(observable, q):
    """Measure ``observable`` with probability ``1 - 2q``, else output a random bit."""
    proj = Povm.from_observable(observable).effects
    eye = np.eye(proj[0].shape[0])
    return Povm([(1 - 2 * q) * e + q * eye for e in proj])


def dephasing_measurements(c, q):
    """Bob's tests are ``(Z +- C X)/sqrt(1+C^2)``; his key setting is Z with noise ``q``."""
    P = Povm.from_observable
    n = math.sqrt(1 + c * c)
    return [
        [P(SIGMA_Z), P(SIGMA_X)],
        [P((SIGMA_Z + c * SIGMA_X) / n), P((SIGMA_Z - c * SIGMA_X) / n), noisy_povm(SIGMA_Z, q)],
        [P(SIGMA_Z), P(SIGMA_X)],
    ]


def dephasing_parameters(s):
    """``(C, Q)`` for parity-CHSH value ``s``: ``S = sqrt(1 + C^2)``, ``Q = (1 - S/sqrt2)/2``."""
    s = _in_range(s, 1.0, SQRT2, "S")
    c = min(math.sqrt(max(s * s - 1.0, 0.0)), 1.0)
    q = max(0.5 * (1.0 - s / SQRT2), 0.0)
    return c, q


def dephasing_extension(s):
    """Purification-based extension of the dephased GHZ device at value ``s``."""
    c, q = dephasing_parameters(s)
    rho, purification = dephasing_state(c)
    return quantum_extension_from_purification(rho, dephasing_measurements(c, q), purification=purification)


def dephasing_key_state(c, q):
    """Post-measurement key state with noisy Bob, written out explicitly.

    Registers ``A1, A2, A3``; E-states are ``rho_E^+`` for Alice's bit 0 and
    ``rho_E^-`` for bit 1, Bob's bit flipped with probability ``q``.
    """
    from .cq import CqState

    plus, minus = rho_e_pm(c)
    w = np.zeros((2, 2, 2))
    e = np.zeros((2, 2, 2, 2, 2), dtype=complex)
    for a in (0, 1):
        for b in (0, 1):
            w[a, b, a] = (1 - q) / 2 if a == b else q / 2
            e[a, b, a] = plus if a == 0 else minus
    return CqState([("A1", 2), ("A2", 2), ("A3", 2)], w, e)


def per_input_total_correlations(s, num_parties, include_e=True):
    """``I(A_1;...;A_M | E, X = x)`` for every input tuple of an embedded box."""
    x_names = [f"X{i + 1}" for i in range(num_parties)]
    groups = [f"A{i + 1}" for i in range(num_parties)]
    sizes = [s.size_of(n) for n in x_names]
    out = {}
    for x in np.ndindex(*sizes):
        if s.marginal(x_names).weights[x] <= 0:
            continue
        sub = s.restrict(dict(zip(x_names, x)))
        out[tuple(int(v) for v in x)] = total_correlation(sub, groups, include_e=include_e)
    return out


def dephasing_attack_bound(s, return_tuple=False):
    """Half the largest per-tuple ``I(A;B;C|E)`` under the dephasing attack."""
    ext = dephasing_extension(s)
    vals = per_input_total_correlations(ext, 3)
    best = max(vals, key=vals.get)
    bound = 0.5 * max(vals[best], 0.0)
    return (bound, best) if return_tuple else bound


# ---------------------------------------------------------------- depolarizing

def depolarize_each_qubit(state, p_dep):
    """``D^{(x)n}`` with ``D(rho) = (1 - p) rho + p I/2`` on every qubit."""
    p_dep = _in_range(p_dep, 0.0, 1.0, "p_dep")
    if any(d != 2 for d in state.dims):
        raise ValueError("depolarize_each_qubit expects qubit subsystems")
    n = len(state.dims)
    t = state.matrix.reshape((2,) * (2 * n))
    for k in range(n):
        # partial trace over qubit k, re-padded with I/2
        traced = np.trace(t, axis1=k, axis2=k + n)
        mixed = np.expand_dims(np.expand_dims(traced, k), k + n) * (np.eye(2) / 2).reshape(
            [2 if j in (k, k + n) else 1 for j in range(2 * n)])
        t = (1 - p_dep) * t + p_dep * mixed
    return DensityMatrix(t.reshape(2 ** n, 2 ** n), state.dims, validate=False)


def depolarized_ghz_s(p_dep):
    rho = depolarize_each_qubit(ghz_state(), p_dep)
    return bell_value_S(from_state_and_povms(rho, standard_measurements_tripartite()))


def depolarizing_crossing():
    """``p_dep`` at which the parity-CHSH value of the depolarized GHZ state is 1."""
    return brentq(lambda p: depolarized_ghz_s(p) - 1.0, 0.0, 1.0, xtol=1e-15, rtol=1e-15)


def depolarizing_sweep(grid, include_crossing=True):
    """Rows ``(p_dep, S, bound)``; the bound is 0 once ``S <= 1``.

    The bound at each point is the isotropic-family bound at the same S.
    """
    grid = sorted(set(_in_range(float(g), 0.0, 1.0, "p_dep") for g in grid))
    if include_crossing and grid and grid[0] <= depolarizing_crossing() <= grid[-1]:
        grid = sorted(set(grid) | {depolarizing_crossing()})
    rows = []
    for p in grid:
        s = depolarized_ghz_s(p)
        bound = convex_attack_bound_at_s(min(s, SQRT2)) if s > 1.0 else 0.0
        rows.append((p, s, bound))
    return SweepResult(rows, "fig3")


# ------------------------------------------------------------- bipartite DIQKD

def dephased_bell_state(c):
    """``(1-C)/2 Phi- + (1+C)/2 Phi+`` and its purification ``(psi, 2)``."""
    c = _in_range(c, 0.0, 1.0, "C")
    plus = (ket("00") + ket("11")) / SQRT2
    minus = (ket("00") - ket("11")) / SQRT2
    lo, hi = math.sqrt((1 - c) / 2), math.sqrt((1 + c) / 2)
    rho = DensityMatrix(lo ** 2 * np.outer(minus, minus.conj()) + hi ** 2 * np.outer(plus, plus.conj()),
                        (2, 2), validate=False)
    psi = lo * np.kron(minus, [1, 0]) + hi * np.kron(plus, [0, 1])
    return rho, (psi, 2)


def diqkd_parameters(s):
    """``(C, Q)`` for CHSH value ``s``: ``S = 2 sqrt(1 + C^2)``, ``Q = (1 - S/(2 sqrt2))/2``."""
    s = _in_range(s, 2.0, 2 * SQRT2, "S")
    c = min(math.sqrt(max(s * s / 4.0 - 1.0, 0.0)), 1.0)
    q = max(0.5 * (1.0 - s / (2 * SQRT2)), 0.0)
    return c, q


def diqkd_measurements(c, q):
    """Alice {Z, X}; Bob {noisy Z, noisy X, (Z +- C X)/sqrt(1+C^2)}."""
    P = Povm.from_observable
    n = math.sqrt(1 + c * c)
    return [
        [P(SIGMA_Z), P(SIGMA_X)],
        [noisy_povm(SIGMA_Z, q), noisy_povm(SIGMA_X, q),
         P((SIGMA_Z + c * SIGMA_X) / n), P((SIGMA_Z - c * SIGMA_X) / n)],
    ]


def diqkd_test_measurements(c):
    """Settings entering the CHSH value: Alice {Z, X}, Bob {(Z +- C X)/sqrt(1+C^2)}."""
    P = Povm.from_observable
    n = math.sqrt(1 + c * c)
    return [[P(SIGMA_Z), P(SIGMA_X)], [P((SIGMA_Z + c * SIGMA_X) / n), P((SIGMA_Z - c * SIGMA_X) / n)]]


_HADAMARD = np.array([[1, 1], [1, -1]]) / SQRT2


def measure_e_conjugate(blocks):
    """Dephase E in the ``|+>, |->`` basis (Eve measures her flag qubit)."""
    rotated = _HADAMARD @ blocks @ _HADAMARD
    diag = np.einsum("bii->bi", rotated)
    return np.einsum("bi,ij->bij", diag, np.eye(2))


DIQKD_EXTENSIONS = ("purification", "measured")


def diqkd_extension(s, kind="purification"):
    c, q = diqkd_parameters(s)
    rho, purification = dephased_bell_state(c)
    ext = quantum_extension_from_purification(rho, diqkd_measurements(c, q), purification=purification)
    if kind == "measured":
        ext = ext.map_e(measure_e_conjugate)
    elif kind != "purification":
        raise ValueError(f"unknown extension kind {kind!r}")
    return ext


def diqkd_attack_bound(s, extensions=DIQKD_EXTENSIONS, return_details=False):
    """Smallest, over the listed extensions, of the largest per-pair ``I(A;B|E)``.

    Each extension is a valid quantum extension, so every candidate is an
    upper bound and so is their minimum.
    """
    details = {}
    for kind in extensions:
        vals = per_input_total_correlations(diqkd_extension(s, kind), 2)
        best = max(vals, key=vals.get)
        details[kind] = (max(vals[best], 0.0), best)
    kind = min(details, key=lambda k: details[k][0])
    bound = details[kind][0]
    return (bound, details) if return_details else bound


# --------------------------------------------------------------------- figures

FIGURES = ("fig2-attack1", "fig2-dephasing", "fig3", "fig4")


def default_grid(which, steps=100):
    if which in ("fig2-attack1", "fig2-dephasing"):
        return np.linspace(1.0, SQRT2, steps)
    if which == "fig3":
        return np.linspace(0.0, 1.0, steps)
    if which == "fig4":
        return np.linspace(2.0, 2 * SQRT2, steps)
    raise ValueError(f"unknown figure {which!r}; choose from {FIGURES}")


def _row(which, x):
    if which == "fig2-attack1":
        return (x, x, convex_attack_bound_at_s(x))
    if which == "fig2-dephasing":
        return (x, x, dephasing_attack_bound(x))
    if which == "fig4":
        return (x, x, diqkd_attack_bound(x))
    raise ValueError(which)


def _row_args(args):
    return _row(*args)


def figure_sweep(which, grid=None, steps=100, workers=1):
    """Figure data; fig2/fig4 are parameterized by S, fig3 by ``p_dep``."""
    if which not in FIGURES:
        raise ValueError(f"unknown figure {which!r}; choose from {FIGURES}")
    grid = default_grid(which, steps) if grid is None else np.asarray(grid, dtype=float)
    if which == "fig3":
        return depolarizing_sweep(grid)
    args = [(which, float(x)) for x in grid]
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_row_args, args))
    else:
        rows = [_row(*a) for a in args]
    return SweepResult(rows, which)
