"""Monte-Carlo simulation of the RMW18 conference key protocol.

Only the statistics are simulated: round types, inputs, outputs, the
parity-CHSH tally and key-round error rates. Error correction and privacy
amplification are not modelled, and publishing the inputs has no effect on
i.i.d. statistics, so that step is a no-op.

Randomness comes from numpy's PCG64 generator. Rounds are processed in
fixed-size chunks; chunk ``k`` draws from ``SeedSequence(seed, spawn_key=(k,))``
so the result does not depend on how chunks are grouped into blocks.
"""

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .correlations import Correlation, check_no_signaling

DEFAULT_WIN_THRESHOLD = 0.76
CHUNK_ROUNDS = 8192
BOTTOM = "⊥"


class ProtocolError(ValueError):
    pass


@dataclass
class ProtocolConfig:
    device: Correlation
    num_rounds: int
    mu: float = 0.5
    win_threshold: float = DEFAULT_WIN_THRESHOLD
    rng_seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.mu <= 1.0:
            raise ProtocolError(f"mu must lie in [0, 1], got {self.mu}")
        if int(self.num_rounds) != self.num_rounds or self.num_rounds < 0:
            raise ProtocolError(f"num_rounds must be a non-negative integer, got {self.num_rounds}")
        self.num_rounds = int(self.num_rounds)
        report = check_no_signaling(self.device, tol=1e-8)
        if not report.passed:
            raise ProtocolError(f"device is signaling: {report}")

    def to_dict(self):
        return {
            "device": json.loads(self.device.to_json()),
            "num_rounds": self.num_rounds,
            "mu": self.mu,
            "win_threshold": self.win_threshold,
            "rng_seed": self.rng_seed,
        }

    @classmethod
    def from_dict(cls, data, base_dir="."):
        """``device`` may be an inline correlation object or a path to one."""
        try:
            dev = data["device"]
            if isinstance(dev, str):
                device = Correlation.load(os.path.join(base_dir, dev))
            else:
                device = Correlation.from_dict(dev)
            return cls(
                device=device,
                num_rounds=data["num_rounds"],
                mu=float(data.get("mu", 0.5)),
                win_threshold=float(data.get("win_threshold", DEFAULT_WIN_THRESHOLD)),
                rng_seed=int(data.get("rng_seed", 0)),
            )
        except KeyError as exc:
            raise ProtocolError(f"config lacks field {exc}") from exc

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        return cls.from_dict(data, os.path.dirname(os.path.abspath(path)))


@dataclass
class ProtocolStats:
    num_rounds: int
    rounds_tested: int
    rounds_key: int
    wins: int
    empirical_win: float | None  # None when no round was tested
    empirical_qber: dict  # "A1-Ai" -> rate (None without key rounds)
    aborted: bool
    c_counts: dict = field(default_factory=dict)  # "0", "1", BOTTOM
    test_input_counts: dict = field(default_factory=dict)  # "x1x2" -> count
    win_threshold: float = DEFAULT_WIN_THRESHOLD
    rng_seed: int = 0

    def to_json(self):
        return json.dumps(asdict(self), indent=2, ensure_ascii=False, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text):
        return cls(**json.loads(text))

    def save(self, path):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_json())

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(fh.read())


def _check_device(p):
    m = p.num_parties
    if any(k != 2 for k in p.output_sizes):
        raise ProtocolError(f"binary outputs required, got {p.output_sizes}")
    need = [2, 3] + [2] * (m - 2)
    for i, (have, want) in enumerate(zip(p.input_sizes, need)):
        if have < want:
            raise ProtocolError(f"party {i + 1} needs {want} inputs, device has {have}")


def _sampler(p):
    """Cumulative output distribution per flattened input tuple."""
    m = p.num_parties
    t = np.moveaxis(p.table, list(range(m, 2 * m)), list(range(m)))
    flat = t.reshape(math.prod(p.input_sizes), -1)
    return np.cumsum(flat, axis=1)


def _run_chunk(args):
    cdf, sizes_in, m, mu, seed, index, count = args
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(index,))))
    test = rng.random(count) < mu
    bits = rng.integers(0, 2, size=(count, 2))
    u = rng.random(count)

    x = np.zeros((count, m), dtype=np.int64)
    x[:, 1] = 2
    x[test, 0] = bits[test, 0]
    x[test, 1] = bits[test, 1]
    x[test, 2:] = 1
    flat_x = np.ravel_multi_index(tuple(x.T), sizes_in)
    out = np.minimum((u[:, None] >= cdf[flat_x]).sum(axis=1), cdf.shape[1] - 1)
    a = np.stack(np.unravel_index(out, (2,) * m), axis=1)

    tail = np.bitwise_xor.reduce(a[:, 2:], axis=1) if m > 2 else np.zeros(count, dtype=np.int64)
    won = (a[:, 0] ^ a[:, 1]) == (x[:, 0] & (x[:, 1] ^ tail))
    key = ~test
    errors = [int(np.count_nonzero(a[key, 0] != a[key, i])) for i in range(1, m)]
    inputs = [int(np.count_nonzero(test & (x[:, 0] == i) & (x[:, 1] == j))) for i in (0, 1) for j in (0, 1)]
    return np.array([int(test.sum()), int(np.count_nonzero(won & test))] + errors + inputs, dtype=np.int64)


def run_rmw18(cfg, workers=1):
    """Simulate ``cfg.num_rounds`` i.i.d. rounds and tally the statistics.

    Args:
        cfg: protocol configuration.
        workers: process count; the result is identical for any value.

    Raises:
        ProtocolError: zero rounds or a device without the needed inputs.
    """
    p = cfg.device
    if cfg.num_rounds == 0:
        raise ProtocolError("num_rounds must be positive")
    _check_device(p)
    m = p.num_parties
    cdf = _sampler(p)
    n = cfg.num_rounds
    jobs = [(cdf, p.input_sizes, m, cfg.mu, cfg.rng_seed, k, min(CHUNK_ROUNDS, n - start))
            for k, start in enumerate(range(0, n, CHUNK_ROUNDS))]
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_chunk, jobs))
    else:
        parts = [_run_chunk(j) for j in jobs]
    total = np.sum(parts, axis=0)

    tested, wins = int(total[0]), int(total[1])
    errors = total[2:2 + m - 1]
    inputs = total[2 + m - 1:]
    key = n - tested
    win = wins / tested if tested else None
    qber = {f"A1-A{i + 2}": (int(e) / key if key else None) for i, e in enumerate(errors)}
    return ProtocolStats(
        num_rounds=n,
        rounds_tested=tested,
        rounds_key=key,
        wins=wins,
        empirical_win=win,
        empirical_qber=qber,
        aborted=bool(tested and win < cfg.win_threshold),
        c_counts={"1": wins, "0": tested - wins, BOTTOM: key},
        test_input_counts={f"{i}{j}": int(inputs[2 * i + j]) for i in (0, 1) for j in (0, 1)},
        win_threshold=cfg.win_threshold,
        rng_seed=cfg.rng_seed,
    )


def estimated_rate_report(stats, curve):
    """Put the simulated Bell value next to an upper-bound curve.

    Args:
        stats: non-aborted simulation statistics with at least one test round.
        curve: a ``SweepResult`` whose S column is used for interpolation.
    """
    if stats.aborted:
        raise ProtocolError("protocol aborted; no rate to report")
    if stats.empirical_win is None:
        raise ProtocolError("no test rounds; S cannot be estimated")
    s = 4.0 * stats.empirical_win - 2.0
    return {
        "S": s,
        "upper_bound": curve.bound_at_s(s),
        "qber": dict(stats.empirical_qber),
        "curve": curve.name,
    }

