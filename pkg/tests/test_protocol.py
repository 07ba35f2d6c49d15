import json
import math

import numpy as np
import pytest

from inlbound import protocol
from inlbound.attacks import SweepResult, isotropic_correlation
from inlbound.correlations import Correlation
from inlbound.games import parity_chsh_win_probability
from inlbound.protocol import ProtocolConfig, ProtocolError, ProtocolStats, estimated_rate_report, run_rmw18

GHZ = isotropic_correlation(0.0)


def test_ghz_statistics():
    stats = run_rmw18(ProtocolConfig(GHZ, 20000, 0.5, rng_seed=1))
    omega = parity_chsh_win_probability(GHZ)
    se = math.sqrt(omega * (1 - omega) / stats.rounds_tested)
    assert abs(stats.empirical_win - omega) <= 5 * se
    assert stats.empirical_qber == {"A1-A2": 0.0, "A1-A3": 0.0}
    assert stats.rounds_tested + stats.rounds_key == 20000
    assert stats.c_counts["1"] + stats.c_counts["0"] == stats.rounds_tested
    assert stats.c_counts[protocol.BOTTOM] == stats.rounds_key
    assert not stats.aborted


def test_input_marginals_within_three_sigma():
    stats = run_rmw18(ProtocolConfig(GHZ, 40000, 0.3, rng_seed=2))
    n = 40000
    assert abs(stats.rounds_tested - 0.3 * n) <= 3 * math.sqrt(n * 0.3 * 0.7)
    t = stats.rounds_tested
    for c in stats.test_input_counts.values():
        assert abs(c - t / 4) <= 3 * math.sqrt(t * 0.25 * 0.75)


def test_reproducible_and_block_independent():
    cfg = ProtocolConfig(isotropic_correlation(0.1), 30000, 0.5, rng_seed=9)
    a = run_rmw18(cfg)
    b = run_rmw18(cfg)
    c = run_rmw18(cfg, workers=2)
    assert a == b == c
    assert a.to_json() == c.to_json()
    other = run_rmw18(ProtocolConfig(isotropic_correlation(0.1), 30000, 0.5, rng_seed=10))
    assert other != a


def test_uniform_device_aborts():
    p = Correlation.uniform((2, 2, 2), (2, 3, 2))
    stats = run_rmw18(ProtocolConfig(p, 20000, 0.5, 0.75, rng_seed=3))
    assert abs(stats.empirical_win - 0.5) < 0.01
    assert stats.aborted


def test_mu_zero_never_aborts():
    stats = run_rmw18(ProtocolConfig(Correlation.uniform((2, 2, 2), (2, 3, 2)), 500, 0.0))
    assert stats.rounds_tested == 0 and stats.rounds_key == 500
    assert stats.empirical_win is None and not stats.aborted
    with pytest.raises(ProtocolError):
        estimated_rate_report(stats, SweepResult([(1, 1, 0), (2, 2, 1)]))


def test_mu_one_has_no_key_rounds():
    stats = run_rmw18(ProtocolConfig(GHZ, 500, 1.0))
    assert stats.rounds_key == 0
    assert stats.empirical_qber["A1-A2"] is None


def test_config_errors():
    with pytest.raises(ProtocolError):
        ProtocolConfig(GHZ, 10, 1.5)
    with pytest.raises(ProtocolError):
        run_rmw18(ProtocolConfig(GHZ, 0))
    with pytest.raises(ProtocolError):
        run_rmw18(ProtocolConfig(Correlation.uniform((2, 2, 2), (2, 2, 2)), 10))
    with pytest.raises(ProtocolError):
        run_rmw18(ProtocolConfig(Correlation.uniform((2, 3, 2), (2, 3, 2)), 10))
    t = np.zeros((2, 2, 2, 3))
    for x in range(2):
        for y in range(3):
            t[0, x, x, y] = 1.0
    with pytest.raises(ProtocolError):
        ProtocolConfig(Correlation(t), 10)


def test_bipartite_device():
    t = isotropic_correlation(0.0).table.sum(axis=2)[..., 0]
    stats = run_rmw18(ProtocolConfig(Correlation(t), 2000, 0.5))
    assert list(stats.empirical_qber) == ["A1-A2"]


def test_stats_and_config_json(tmp_path):
    stats = run_rmw18(ProtocolConfig(GHZ, 1000, 0.5, rng_seed=4))
    path = tmp_path / "s.json"
    stats.save(path)
    assert ProtocolStats.load(path) == stats
    cfg = ProtocolConfig(GHZ, 1000, 0.5, rng_seed=4)
    cpath = tmp_path / "c.json"
    cpath.write_text(json.dumps(cfg.to_dict()))
    assert run_rmw18(ProtocolConfig.load(cpath)) == stats
    GHZ.save(tmp_path / "dev.json")
    cpath.write_text(json.dumps({"device": "dev.json", "num_rounds": 1000, "rng_seed": 4}))
    assert run_rmw18(ProtocolConfig.load(cpath)) == stats
    with pytest.raises(ProtocolError):
        ProtocolConfig.from_dict({"device": json.loads(GHZ.to_json())})


def test_rate_report():
    curve = SweepResult([(1.0, 1.0, 0.0), (1.2, 1.2, 0.5), (math.sqrt(2), math.sqrt(2), 1.0)])
    stats = run_rmw18(ProtocolConfig(GHZ, 5000, 0.5, rng_seed=5))
    rep = estimated_rate_report(stats, curve)
    assert rep["S"] == pytest.approx(4 * stats.empirical_win - 2)
    stats.empirical_win = 0.75
    assert estimated_rate_report(stats, curve)["upper_bound"] == 0.0
    stats.empirical_win = 0.8
    assert estimated_rate_report(stats, curve)["upper_bound"] == pytest.approx(0.5)
    stats.aborted = True
    with pytest.raises(ProtocolError):
        estimated_rate_report(stats, curve)
