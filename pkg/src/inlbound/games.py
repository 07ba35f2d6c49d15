"""Bell games: parity-CHSH, CHSH, QBER and the nu functional."""

import itertools
from dataclasses import dataclass

import numpy as np

from .correlations import Correlation, CorrelationError


@dataclass(frozen=True)
class GameSpec:
    """Input distribution over test-round tuples plus a winning predicate."""

    num_parties: int
    inputs: dict  # input tuple -> probability
    predicate: object  # callable(outputs, inputs) -> bool

    def __post_init__(self):
        total = sum(self.inputs.values())
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"input distribution sums to {total}")

    def win_probability(self, p):
        omega = 0.0
        for x, qx in self.inputs.items():
            cond = p.conditional(x)
            for a in p.output_tuples():
                if self.predicate(a, x):
                    omega += qx * cond[a]
        return omega


def parity_chsh_game(num_parties):
    """Test rounds: x_1, x_2 uniform bits, every other party inputs 1.

    Win iff ``a_1 xor a_2 == x_1 and (x_2 xor a_3 xor ... xor a_M)``.
    """
    rest = (1,) * (num_parties - 2)
    inputs = {(x1, x2) + rest: 0.25 for x1 in (0, 1) for x2 in (0, 1)}

    def predicate(a, x):
        tail = 0
        for ai in a[2:]:
            tail ^= ai
        return (a[0] ^ a[1]) == (x[0] & (x[1] ^ tail))

    return GameSpec(num_parties, inputs, predicate)


def _require_binary(p, needs):
    if any(k != 2 for k in p.output_sizes):
        raise CorrelationError(f"binary outputs required, got {p.output_sizes}")
    for i, need in enumerate(needs):
        if p.input_sizes[i] <= need:
            raise CorrelationError(f"party {i} needs input {need}, has {p.input_sizes[i]} inputs")


def parity_chsh_win_probability(p):
    m = p.num_parties
    _require_binary(p, [1, 1] + [1] * (m - 2))
    return parity_chsh_game(m).win_probability(p)


def bell_value_S(p):
    """Parity-CHSH violation ``S = 4 * omega - 2``.

    This affine map sends the classical optimum 3/4 to 1 and the ideal GHZ
    value (2 + sqrt 2)/4 to sqrt 2, matching ``Q = (1 - S/sqrt 2)/2``.
    """
    return 4.0 * parity_chsh_win_probability(p) - 2.0


def correlator(p, inputs, parties=None):
    """``<prod_i (-1)^{a_i}>`` over the listed parties at fixed inputs."""
    parties = range(p.num_parties) if parties is None else parties
    cond = p.conditional(inputs)
    total = 0.0
    for a in p.output_tuples():
        sign = (-1) ** sum(a[i] for i in parties)
        total += sign * cond[a]
    return total


def chsh_value(p, settings=((0, 1), (0, 1))):
    """``E00 + E01 + E10 - E11`` for the given (Alice, Bob) setting pairs."""
    if p.num_parties != 2:
        raise CorrelationError("CHSH needs a bipartite correlation")
    (x0, x1), (y0, y1) = settings
    _require_binary(p, [max(x0, x1), max(y0, y1)])
    e = lambda x, y: correlator(p, (x, y))  # noqa: E731
    return e(x0, y0) + e(x0, y1) + e(x1, y0) - e(x1, y1)


def qber(p, key_inputs, pair=(0, 1)):
    """Probability that the two parties' outputs differ at ``key_inputs``."""
    key_inputs = tuple(key_inputs)
    if len(key_inputs) != p.num_parties or any(
            not 0 <= x < k for x, k in zip(key_inputs, p.input_sizes)):
        raise CorrelationError(f"invalid key input tuple {key_inputs}")
    i, j = pair
    cond = p.conditional(key_inputs)
    return float(sum(cond[a] for a in p.output_tuples() if a[i] != a[j]))


def nu_bell_functional(state, observables):
    """``<O0_1 O+_2 O+_3> - <O1_1 O+_2>`` with ``O+ = (O0 + O1)/2``.

    Args:
        observables: three pairs ``(O0, O1)`` of Hermitian observables with
            spectra in [-1, 1].
    """
    obs = []
    for k, pair in enumerate(observables):
        checked = []
        for o in pair:
            o = np.asarray(o, dtype=complex)
            if np.max(np.abs(o - o.conj().T)) > 1e-10:
                raise ValueError(f"observable of party {k} is not Hermitian")
            w = np.linalg.eigvalsh(o)
            if w.min() < -1 - 1e-10 or w.max() > 1 + 1e-10:
                raise ValueError(f"observable of party {k} has spectrum outside [-1, 1]")
            checked.append(o)
        obs.append(checked)
    (a0, a1), (b0, b1), (c0, c1) = obs
    bp, cp = (b0 + b1) / 2, (c0 + c1) / 2
    rho = state.matrix
    first = np.kron(np.kron(a0, bp), cp)
    second = np.kron(np.kron(a1, bp), np.eye(cp.shape[0]))
    return float(np.real(np.trace(rho @ first) - np.trace(rho @ second)))


def classical_parity_chsh_optimum(input_sizes=(2, 3, 2)):
    """Exhaustive maximum over deterministic strategies; returns (omega, strategy)."""
    m = len(input_sizes)
    best, arg = -1.0, None
    per_party = [list(itertools.product((0, 1), repeat=k)) for k in input_sizes]
    for strategy in itertools.product(*per_party):
        p = Correlation.deterministic(strategy, (2,) * m, input_sizes)
        w = parity_chsh_win_probability(p)
        if w > best:
            best, arg = w, strategy
    return best, arg
