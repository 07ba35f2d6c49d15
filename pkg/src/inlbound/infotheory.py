"""Entropic quantities on classical-quantum states.

Registers are addressed by name. A conditioning is a set of classical register
names plus a flag for whether the quantum register E is included.
"""

import math
from dataclasses import dataclass, field

import numpy as np

IDENTITY_TOL = 1e-9


def _names(group):
    if isinstance(group, str):
        return frozenset([group])
    return frozenset(group)


@dataclass(frozen=True)
class RegisterPartition:
    """Groups ``A_1; ...; A_M`` and a conditioner (classical names, E flag)."""

    groups: tuple
    conditioning: frozenset = field(default_factory=frozenset)
    include_e: bool = False

    def __post_init__(self):
        groups = tuple(_names(g) for g in self.groups)
        cond = _names(self.conditioning)
        object.__setattr__(self, "groups", groups)
        object.__setattr__(self, "conditioning", cond)
        seen = set(cond)
        for g in groups:
            if not g:
                raise ValueError("empty register group")
            if seen & g:
                raise ValueError(f"register(s) {sorted(seen & g)} appear in more than one slot")
            seen |= g


def conditional_entropy(s, subject, conditioning=(), include_e=False):
    """``H(subject | conditioning [E])`` in bits."""
    subject, conditioning = _names(subject), _names(conditioning)
    return s.entropy(subject | conditioning, include_e) - s.entropy(conditioning, include_e)


def conditional_mutual_information(s, a, b, conditioning=(), include_e=False):
    """``I(a; b | conditioning [E])``."""
    return conditional_total_correlation(s, RegisterPartition((a, b), conditioning, include_e))


def conditional_total_correlation(s, part):
    """``sum_i H(A_i | cond) - H(A_1 ... A_M | cond)``."""
    cond, e = part.conditioning, part.include_e
    everything = frozenset().union(*part.groups)
    singles = sum(conditional_entropy(s, g, cond, e) for g in part.groups)
    return singles - conditional_entropy(s, everything, cond, e)


def total_correlation(s, groups, conditioning=(), include_e=False):
    return conditional_total_correlation(s, RegisterPartition(tuple(groups), conditioning, include_e))


# ----------------------------------------------------------------- chain rules

TRIPARTITE_LABELS = ("A1", "A2", "B1", "B2", "C1", "C2")


def chain_rule_sides_tripartite(s, labels, conditioning=(), include_e=True):
    """Both sides of the tripartite chain rule for ``I(A1A2; B1B2; C1C2 | E)``.

    Args:
        labels: mapping from ``"A1", "A2", "B1", "B2", "C1", "C2"`` to register
            names (or sets of names).
        conditioning: classical registers that, with E, form the conditioner.

    Returns:
        ``(lhs, rhs)``.
    """
    missing = [k for k in TRIPARTITE_LABELS if k not in labels]
    if missing:
        raise KeyError(f"missing labels {missing}")
    L = {k: _names(labels[k]) for k in TRIPARTITE_LABELS}
    E = _names(conditioning)
    e = include_e

    def tc(groups, extra=frozenset()):
        return total_correlation(s, groups, E | extra, e)

    lhs = tc([L["A1"] | L["A2"], L["B1"] | L["B2"], L["C1"] | L["C2"]])
    second = L["A2"] | L["B2"] | L["C2"]
    rhs = (
        tc([L["A1"], L["B1"], L["C1"]], second)
        + tc([L["A2"], L["B2"], L["C2"]])
        + tc([L["A2"] | L["B2"], L["C1"]], L["C2"])
        + tc([L["B2"] | L["C2"], L["A1"]], L["A2"])
        + tc([L["A2"] | L["C2"], L["B1"]], L["B2"])
    )
    return lhs, rhs


def chain_rule_residual_tripartite(s, labels, conditioning=(), include_e=True):
    lhs, rhs = chain_rule_sides_tripartite(s, labels, conditioning, include_e)
    return abs(lhs - rhs)


def chain_rule_sides_multipartite(s, pairs, conditioning=(), include_e=True):
    """Both sides of the M-party chain rule.

    Args:
        pairs: ``M`` entries ``(first, second)`` naming the registers
            ``A_{i,1}`` and ``A_{i,2}`` of party ``i``.

    Returns:
        ``(lhs, rhs)`` where the left side is
        ``I(A_{1,1}A_{1,2}; ...; A_{M,1}A_{M,2} | E)``.
    """
    pairs = [(_names(a), _names(b)) for a, b in pairs]
    m = len(pairs)
    if m < 2:
        raise ValueError("need at least two parties")
    E = _names(conditioning)
    e = include_e
    firsts = [a for a, _ in pairs]
    seconds = [b for _, b in pairs]
    all_second = frozenset().union(*seconds)

    lhs = total_correlation(s, [a | b for a, b in pairs], E, e)
    rhs = total_correlation(s, seconds, E, e)
    rhs += total_correlation(s, firsts, E | all_second, e)
    for i in range(m):
        others = frozenset().union(*(seconds[j] for j in range(m) if j != i))
        rhs += total_correlation(s, [others, firsts[i]], E | seconds[i], e)
    return lhs, rhs


def chain_rule_residual_multipartite(s, pairs, conditioning=(), include_e=True):
    lhs, rhs = chain_rule_sides_multipartite(s, pairs, conditioning, include_e)
    return abs(lhs - rhs)


def chain_rule_telescope_sides(s, groups, conditioning=(), include_e=True):
    """``I(A_1;...;A_M|E)`` and ``sum_j I(A_j; A_{j+1}...A_M | E)``."""
    groups = [_names(g) for g in groups]
    E = _names(conditioning)
    lhs = total_correlation(s, groups, E, include_e)
    rhs = 0.0
    for j in range(len(groups) - 1):
        rest = frozenset().union(*groups[j + 1:])
        rhs += total_correlation(s, [groups[j], rest], E, include_e)
    return lhs, rhs


def chain_rule_telescope(s, groups, conditioning=(), include_e=True):
    lhs, rhs = chain_rule_telescope_sides(s, groups, conditioning, include_e)
    return abs(lhs - rhs)


# ------------------------------------------------------------------ continuity

def g_epsilon(eps):
    """``(eps + 1) log2(eps + 1) - eps log2(eps)`` with ``0 log 0 = 0``."""
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"eps must lie in [0, 1], got {eps}")
    tail = eps * math.log2(eps) if eps > 0 else 0.0
    return (eps + 1) * math.log2(eps + 1) - tail


def continuity_bound(eps, dims, num_parties):
    """Uniform continuity bound on conditional total correlation.

    ``dims`` are the dimensions of the conditioned systems entering the
    logarithm; their product is used.
    """
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"eps must lie in [0, 1], got {eps}")
    d = math.prod(int(k) for k in dims)
    return 2 * eps * math.log2(d) + num_parties * g_epsilon(eps)


# ------------------------------------------------- classical correlation tables

def _shannon(p, axis):
    p = np.where(p > 1e-12, p, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0, -p * np.log2(np.where(p > 0, p, 1.0)), 0.0)
    return terms.sum(axis=axis)


def input_total_correlations(p):
    """``I(A_1; ...; A_M)`` of ``p(.|x)`` for every input tuple ``x``.

    Returns an array of shape ``p.input_sizes``.
    """
    return table_total_correlations(p.table[None], p.num_parties)[0]


def table_total_correlations(tables, num_parties):
    """Per-input total correlations for a batch of tables ``(B,) + outs + ins``."""
    m = num_parties
    out_axes = tuple(range(1, m + 1))
    joint = _shannon(tables, out_axes)
    singles = 0.0
    for i in range(1, m + 1):
        others = tuple(j for j in out_axes if j != i)
        singles = singles + _shannon(tables.sum(axis=others), 1)
    return singles - joint


def max_input_total_correlation(p):
    """Largest per-input-tuple total correlation and the maximizing tuple."""
    vals = input_total_correlations(p)
    idx = np.unravel_index(int(np.argmax(vals)), vals.shape)
    return float(vals[idx]), tuple(int(i) for i in idx)
