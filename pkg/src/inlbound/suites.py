"""Seeded random-instance suites for the entropic identities.

Shared by the command line and the acceptance tests.
"""

from dataclasses import dataclass

import numpy as np

from .correlations import nosignaling_via_cmi, random_quantum_correlation
from .cq import CqState, random_cq_state
from .infotheory import (
    TRIPARTITE_LABELS,
    chain_rule_sides_multipartite,
    chain_rule_sides_tripartite,
    chain_rule_telescope_sides,
)

RESIDUAL_TOL = 1e-9


@dataclass
class SuiteResult:
    name: str
    trials: int
    worst: float
    tol: float = RESIDUAL_TOL

    @property
    def passed(self):
        return self.worst <= self.tol

    def __str__(self):
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: {self.trials} trials, worst residual {self.worst:.3e} (tol {self.tol:.0e})"


def random_binary_state(rng, names, max_e_dim=4):
    d = int(rng.integers(1, max_e_dim + 1))
    return random_cq_state(rng, [(n, 2) for n in names], e_dim=d)


def corrupt(rng, s, weight=0.2):
    """Mix ``s`` with an unrelated random state of the same shape."""
    other = random_cq_state(rng, s.registers, e_dim=s.e_dim)
    return CqState.from_blocks(s.registers, (1 - weight) * s.blocks() + weight * other.blocks())


def _sides(fn, rng, s, corrupted, *args):
    lhs, _ = fn(s, *args)
    target = corrupt(rng, s) if corrupted else s
    _, rhs = fn(target, *args)
    return abs(lhs - rhs)


def tripartite_chain_rule_suite(trials, rng, corrupted=False):
    labels = {k: k for k in TRIPARTITE_LABELS}
    worst = 0.0
    for _ in range(trials):
        s = random_binary_state(rng, TRIPARTITE_LABELS)
        worst = max(worst, _sides(chain_rule_sides_tripartite, rng, s, corrupted, labels))
    return SuiteResult("tripartite chain rule", trials, worst)


def multipartite_chain_rule_suite(trials, rng, num_parties=4, corrupted=False, max_e_dim=2):
    pairs = [(f"P{i}a", f"P{i}b") for i in range(1, num_parties + 1)]
    names = [n for pair in pairs for n in pair]
    worst = 0.0
    for _ in range(trials):
        s = random_binary_state(rng, names, max_e_dim)
        worst = max(worst, _sides(chain_rule_sides_multipartite, rng, s, corrupted, pairs))
    return SuiteResult(f"multipartite chain rule (M={num_parties})", trials, worst)


def telescope_suite(trials, rng, num_groups=3, corrupted=False):
    groups = [[f"G{i}a", f"G{i}b"] for i in range(1, num_groups + 1)]
    names = [n for g in groups for n in g]
    worst = 0.0
    for _ in range(trials):
        s = random_binary_state(rng, names)
        worst = max(worst, _sides(chain_rule_telescope_sides, rng, s, corrupted, groups))
    return SuiteResult(f"telescope chain rule ({num_groups} groups)", trials, worst)


def nosignaling_cmi_suite(trials, rng):
    worst = 0.0
    for _ in range(trials):
        p, _, _ = random_quantum_correlation(rng)
        worst = max(worst, max(abs(v) for v in nosignaling_via_cmi(p).values()))
    return SuiteResult("no-signaling mutual information", trials, worst)


def run_all(trials, seed, corrupted=False):
    """Every suite on ``trials`` instances, each suite from its own child seed."""
    seqs = np.random.SeedSequence(seed).spawn(4)
    rngs = [np.random.default_rng(s) for s in seqs]
    return [
        tripartite_chain_rule_suite(trials, rngs[0], corrupted),
        multipartite_chain_rule_suite(trials, rngs[1], corrupted=corrupted),
        telescope_suite(trials, rngs[2], corrupted=corrupted),
        nosignaling_cmi_suite(trials, rngs[3]),
    ]
