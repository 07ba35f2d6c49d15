import math

import numpy as np
import pytest

from inlbound import attacks
from inlbound.correlations import from_state_and_povms
from inlbound.games import bell_value_S, chsh_value, qber
from inlbound.infotheory import total_correlation

SQ2 = math.sqrt(2)


def test_isotropic_bell_value_is_linear():
    for p in (0.0, 0.1, attacks.LOCAL_P):
        assert bell_value_S(attacks.isotropic_correlation(p)) == pytest.approx(SQ2 * (1 - p), abs=1e-12)


def test_alpha_of_eps():
    assert attacks.alpha_of_eps(0.1, 0.1) == 0.0
    assert attacks.alpha_of_eps(0.1, 0.0) == pytest.approx(0.1 / attacks.LOCAL_P)
    assert attacks.alpha_of_eps(attacks.LOCAL_P, 0.05) == 1.0
    with pytest.raises(ValueError):
        attacks.alpha_of_eps(0.1, 0.2)
    with pytest.raises(ValueError):
        attacks.alpha_of_eps(0.4, 0.0)


def test_isotropic_mixture_decomposition():
    # q_p = alpha q_local + (1 - alpha) q_eps
    p, eps = 0.12, 0.03
    a = attacks.alpha_of_eps(p, eps)
    lhs = attacks.isotropic_correlation(p).table
    rhs = a * attacks.isotropic_correlation(attacks.LOCAL_P).table + (1 - a) * attacks.isotropic_correlation(eps).table
    np.testing.assert_allclose(lhs, rhs, atol=1e-14)


def test_convex_attack_values():
    assert attacks.convex_attack_bound(0.0) == pytest.approx(1.0, abs=1e-12)
    assert attacks.convex_attack_bound(attacks.LOCAL_P) == 0.0
    b, eps = attacks.convex_attack_bound(0.1, return_eps=True)
    assert 0 < eps < 0.1
    assert b == pytest.approx(0.65593, abs=1e-4)
    # the optimum beats the endpoints eps = 0 and eps = p
    ghz_only = 0.5 * (1 - attacks.alpha_of_eps(0.1, 0.0)) * 2.0
    assert b <= ghz_only
    with pytest.raises(ValueError):
        attacks.convex_attack_bound(0.5)


def test_ghz_tuple_values():
    p = attacks.isotropic_correlation(0.0)
    from inlbound.infotheory import input_total_correlations
    vals = input_total_correlations(p)
    assert vals[attacks.KEY_INPUTS] == pytest.approx(2.0)
    assert vals.max() == pytest.approx(2.0)


def test_dephasing_state_and_purification():
    c = 0.6
    rho, (psi, d) = attacks.dephasing_state(c)
    big = psi.reshape(8, d)
    np.testing.assert_allclose(big @ big.conj().T, rho.matrix, atol=1e-14)
    assert rho.matrix[0, 7].real == pytest.approx(c / 2)


@pytest.mark.parametrize("c", [0.0, 0.3, 0.9, 1.0])
def test_rho_e_rank_one(c):
    plus, minus = attacks.rho_e_pm(c)
    for r in (plus, minus):
        assert abs(np.linalg.det(r)) <= 1e-12
        assert np.trace(r) == pytest.approx(1.0)


def test_dephasing_bell_value_and_qber():
    for s in (1.0, 1.2, 1.35, SQ2):
        c, q = attacks.dephasing_parameters(s)
        rho, _ = attacks.dephasing_state(c)
        p = from_state_and_povms(rho, attacks.dephasing_measurements(c, q))
        assert bell_value_S(p) == pytest.approx(s, abs=1e-12)
        assert qber(p, attacks.KEY_INPUTS) == pytest.approx(0.5 * (1 - s / SQ2), abs=1e-12)


def test_dephasing_key_state_matches_extension():
    s = 1.25
    c, q = attacks.dephasing_parameters(s)
    ext = attacks.dephasing_extension(s).restrict({"X1": 0, "X2": 2, "X3": 0})
    explicit = attacks.dephasing_key_state(c, q)
    got = total_correlation(ext, ["A1", "A2", "A3"], include_e=True)
    want = total_correlation(explicit, ["A1", "A2", "A3"], include_e=True)
    assert got == pytest.approx(want, abs=1e-10)


def test_dephasing_bound_monotone():
    grid = np.linspace(1.0, SQ2, 8)
    b = [attacks.dephasing_attack_bound(s) for s in grid]
    assert b[0] == pytest.approx(0.0, abs=1e-9)
    assert b[-1] == pytest.approx(1.0, abs=1e-9)
    assert np.all(np.diff(b) >= -1e-9)


def test_depolarize_each_qubit():
    ghz = attacks.ghz_state()
    out = attacks.depolarize_each_qubit(ghz, 1.0)
    np.testing.assert_allclose(out.matrix, np.eye(8) / 8, atol=1e-15)
    np.testing.assert_allclose(attacks.depolarize_each_qubit(ghz, 0.0).matrix, ghz.matrix)
    p = 0.2
    s = attacks.depolarized_ghz_s(p)
    assert s == pytest.approx(0.5 * (SQ2 * (1 - p) ** 2 + SQ2 * (1 - p) ** 3), abs=1e-12)


def test_depolarizing_sweep_has_crossing():
    res = attacks.depolarizing_sweep(np.linspace(0, 1, 11))
    pc = attacks.depolarizing_crossing()
    assert pc in res.parameters
    for p, s, b in res.rows:
        assert (b > 0) == (s > 1.0 + 1e-12)
    assert res.rows[0][1] == pytest.approx(SQ2, abs=1e-12)


def test_diqkd_family():
    for s in (2.0, 2.5, 2 * SQ2):
        c, q = attacks.diqkd_parameters(s)
        rho, _ = attacks.dephased_bell_state(c)
        p = from_state_and_povms(rho, attacks.diqkd_test_measurements(c))
        assert chsh_value(p) == pytest.approx(2 * math.sqrt(1 + c * c), abs=1e-12)
        key = from_state_and_povms(rho, attacks.diqkd_measurements(c, q))
        assert qber(key, (0, 0)) == pytest.approx(q, abs=1e-12)


def test_diqkd_bound_uses_smaller_extension():
    b, details = attacks.diqkd_attack_bound(2.2, return_details=True)
    assert set(details) == {"purification", "measured"}
    assert b == min(v[0] for v in details.values())
    assert attacks.diqkd_attack_bound(2.0) == pytest.approx(0.0, abs=1e-9)
    with pytest.raises(ValueError):
        attacks.diqkd_extension(2.2, "other")


def test_sweep_csv_roundtrip():
    res = attacks.figure_sweep("fig2-dephasing", steps=4)
    text = res.to_csv()
    assert text.splitlines()[0] == "parameter,S,bound"
    assert "\r" not in text
    back = attacks.SweepResult.from_csv(text)
    np.testing.assert_allclose(back.bounds, res.bounds, rtol=1e-11, atol=1e-12)
    overlay = res.to_csv(overlay=[None, 0.1, 0.2, 0.3])
    assert overlay.splitlines()[0].endswith(",lower_bound")
    assert overlay.splitlines()[1].endswith(",")
    with pytest.raises(ValueError):
        attacks.SweepResult.from_csv("a,b\n1,2\n")


def test_bound_at_s_interpolates():
    res = attacks.SweepResult([(1.0, 1.0, 0.0), (2.0, 2.0, 1.0)])
    assert res.bound_at_s(1.25) == pytest.approx(0.25)
    assert res.bound_at_s(5.0) == 1.0


def test_figure_sweep_parallel_matches_serial():
    a = attacks.figure_sweep("fig4", steps=3)
    b = attacks.figure_sweep("fig4", steps=3, workers=2)
    assert a.rows == b.rows
    with pytest.raises(ValueError):
        attacks.figure_sweep("fig9")


def _e_marginal_spread(ext, m):
    # sum over outputs of the unnormalized E blocks, per input tuple, divided by q(x)
    b = ext.blocks().sum(axis=tuple(range(m)))
    w = np.real(np.trace(b, axis1=-2, axis2=-1))
    rho = b / w[..., None, None]
    flat = rho.reshape(-1, *rho.shape[-2:])
    return max(np.abs(r - flat[0]).max() for r in flat)


def test_purification_extensions_do_not_signal_to_e():
    assert _e_marginal_spread(attacks.dephasing_extension(1.2), 3) <= 1e-10
    assert _e_marginal_spread(attacks.diqkd_extension(2.3), 2) <= 1e-10
    assert _e_marginal_spread(attacks.diqkd_extension(2.3, "measured"), 2) <= 1e-10


def test_bounds_stay_in_unit_interval():
    for name in ("fig2-attack1", "fig2-dephasing", "fig4"):
        b = attacks.figure_sweep(name, steps=6).bounds
        assert np.all(b >= -1e-9) and np.all(b <= 1 + 1e-9)


def test_convex_bound_below_trivial_extension():
    from inlbound.infotheory import input_total_correlations
    for p in (0.02, 0.1, 0.25):
        trivial = 0.5 * input_total_correlations(attacks.isotropic_correlation(p)).max()
        assert attacks.convex_attack_bound(p) <= trivial + 1e-12
