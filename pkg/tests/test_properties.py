import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from inlbound.correlations import (
    apply_locr,
    check_no_signaling,
    embed_cq,
    random_output_wiring,
    random_quantum_correlation,
    random_wiring,
)
from inlbound.cq import random_cq_state
from inlbound.infotheory import (
    TRIPARTITE_LABELS,
    chain_rule_residual_tripartite,
    conditional_entropy,
    conditional_mutual_information,
    input_total_correlations,
    total_correlation,
)
from inlbound.qmat import partial_trace, random_density_matrix, von_neumann_entropy

seeds = st.integers(min_value=0, max_value=2**32 - 1)


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(1, 4))
def test_chain_rule_any_state(seed, d):
    s = random_cq_state(np.random.default_rng(seed), [(k, 2) for k in TRIPARTITE_LABELS], e_dim=d)
    assert chain_rule_residual_tripartite(s, {k: k for k in TRIPARTITE_LABELS}) <= 1e-9


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(1, 3))
def test_entropic_inequalities(seed, d):
    s = random_cq_state(np.random.default_rng(seed), [("A", 2), ("B", 3), ("C", 2)], e_dim=d)
    # classical registers: H(A|BE) >= 0 and strong subadditivity
    assert conditional_entropy(s, "A", "B", include_e=True) >= -1e-10
    assert conditional_mutual_information(s, "A", "B", "C", include_e=True) >= -1e-10
    assert total_correlation(s, "ABC", include_e=True) >= -1e-10
    # conditioning on E of dimension d moves I(A;B) by at most 2 log2 d
    gap = abs(conditional_mutual_information(s, "A", "B", include_e=True) - conditional_mutual_information(s, "A", "B"))
    assert gap <= 2 * np.log2(d) + 1e-10


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_quantum_correlations_are_no_signaling(seed):
    p, _, _ = random_quantum_correlation(np.random.default_rng(seed))
    assert check_no_signaling(p, 1e-10).passed


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_output_processing_data_processing(seed):
    rng = np.random.default_rng(seed)
    p, _, _ = random_quantum_correlation(rng)
    q = apply_locr(p, random_output_wiring(rng, p))
    assert input_total_correlations(q).max() <= input_total_correlations(p).max() + 1e-9


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_general_wirings_keep_validity(seed):
    rng = np.random.default_rng(seed)
    p, _, _ = random_quantum_correlation(rng)
    q = apply_locr(p, random_wiring(rng, p))
    assert check_no_signaling(q, 1e-10).passed
    np.testing.assert_allclose(q.table.sum(axis=(0, 1, 2)), 1.0, atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_subadditivity(seed):
    rho = random_density_matrix(np.random.default_rng(seed), 8, dims=(2, 2, 2))
    s_ab = von_neumann_entropy(partial_trace(rho, [0, 1]))
    s_a = von_neumann_entropy(partial_trace(rho, [0]))
    s_b = von_neumann_entropy(partial_trace(rho, [1]))
    assert s_ab <= s_a + s_b + 1e-10
    assert abs(s_a - s_b) <= s_ab + 1e-10


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_input_distribution_weighting(seed):
    # I(A;B;C|X) is linear in the input distribution for a fixed box
    rng = np.random.default_rng(seed)
    p, _, _ = random_quantum_correlation(rng)
    q = rng.dirichlet(np.ones(8)).reshape(2, 2, 2)
    got = total_correlation(embed_cq(p, q), ["A1", "A2", "A3"], ["X1", "X2", "X3"])
    expect = float(np.sum(q * input_total_correlations(p)))
    assert abs(got - expect) <= 1e-10
