import itertools

import numpy as np
import pytest

from inlbound.cq import CqState, random_cq_state
from inlbound.qmat import StateError
from oracles import CqOracle, oracle_from_state

REGS = [("A", 2), ("B", 3), ("C", 2)]


@pytest.mark.parametrize("d", [1, 2, 3])
def test_entropies_match_joint_matrix(d):
    rng = np.random.default_rng(d)
    s = random_cq_state(rng, REGS, e_dim=d)
    oracle = oracle_from_state(s)
    for r in range(0, 4):
        for names in itertools.combinations("ABC", r):
            for with_e in (False, True):
                if not names and not with_e:
                    continue
                assert s.entropy(names, with_e) == pytest.approx(oracle.entropy(names, with_e), abs=1e-10)


def test_rank_deficient_e_states():
    rng = np.random.default_rng(11)
    s = random_cq_state(rng, REGS, e_dim=4, rank=1)
    oracle = oracle_from_state(s)
    assert s.entropy(["A", "B", "C"], True) == pytest.approx(oracle.entropy(["A", "B", "C"], True), abs=1e-10)
    assert s.entropy([], True) == pytest.approx(oracle.entropy([], True), abs=1e-10)


def test_validation():
    with pytest.raises(StateError):
        CqState([("A", 2)], [0.6, 0.6])
    with pytest.raises(StateError):
        CqState([("A", 2)], [0.5, 0.5], np.array([np.eye(2), np.eye(2)]))
    with pytest.raises(ValueError):
        CqState([("A", 2), ("A", 2)], np.full((2, 2), 0.25))


def test_marginal_and_restrict():
    rng = np.random.default_rng(4)
    s = random_cq_state(rng, REGS, e_dim=2)
    m = s.marginal(["C", "A"])
    assert m.names == ("C", "A")
    np.testing.assert_allclose(m.weights, s.weights.sum(axis=1).T)
    r = s.restrict({"B": 1})
    w = s.weights[:, 1, :]
    np.testing.assert_allclose(r.weights, w / w.sum())
    np.testing.assert_allclose(r.e_states[1, 0], s.e_states[1, 1, 0], atol=1e-12)
    with pytest.raises(KeyError):
        s.restrict({"Z": 0})


def test_classical_channel_matches_oracle():
    rng = np.random.default_rng(8)
    s = random_cq_state(rng, REGS, e_dim=2)
    ch = rng.dirichlet(np.ones(2), size=3).T  # 3 -> 2, columns sum to 1
    t = s.apply_classical_channel("B", ch)
    assert t.sizes == (2, 2, 2)
    w = np.einsum("nb,abc->anc", ch, s.weights)
    np.testing.assert_allclose(t.weights, w, atol=1e-14)
    with pytest.raises(ValueError):
        s.apply_classical_channel("B", np.ones((2, 3)))


def test_product_entropy_adds():
    rng = np.random.default_rng(6)
    a = random_cq_state(rng, [("A", 2)], e_dim=2)
    b = random_cq_state(rng, [("B", 3)], e_dim=2)
    ab = a.product(b)
    assert ab.e_dim == 4
    assert ab.entropy(["A", "B"], True) == pytest.approx(a.entropy(["A"], True) + b.entropy(["B"], True), abs=1e-10)
    with pytest.raises(ValueError):
        a.product(a)


def test_map_e_trace_out_gives_classical():
    rng = np.random.default_rng(3)
    s = random_cq_state(rng, REGS, e_dim=3)
    t = s.map_e(lambda b: np.trace(b, axis1=1, axis2=2)[:, None, None])
    assert t.e_dim == 1
    assert t.entropy(["A", "B"], True) == pytest.approx(s.entropy(["A", "B"]), abs=1e-12)


def test_to_density_matrix_and_trace_distance():
    rng = np.random.default_rng(1)
    s = random_cq_state(rng, [("A", 2)], e_dim=2)
    o = CqOracle(s.names, s.sizes, s.weights, s.e_states)
    np.testing.assert_allclose(s.to_density_matrix().matrix, o.mat, atol=1e-14)
    assert s.trace_distance(s) == pytest.approx(0.0, abs=1e-14)
    t = random_cq_state(rng, [("A", 2)], e_dim=2)
    diff = o.mat - CqOracle(t.names, t.sizes, t.weights, t.e_states).mat
    assert s.trace_distance(t) == pytest.approx(0.5 * np.abs(np.linalg.eigvalsh(diff)).sum(), abs=1e-12)
