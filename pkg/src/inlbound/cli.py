"""Command-line interface.

Exit codes: 0 success, 1 I/O or parse error, 2 validation failure,
3 protocol abort.
"""

import argparse
import csv
import json
import math
import sys

import numpy as np

from . import attacks, suites
from .correlations import Correlation, CorrelationError, check_no_signaling, embed_cq
from .infotheory import total_correlation
from .protocol import ProtocolConfig, ProtocolError, run_rmw18

EXIT_OK, EXIT_IO, EXIT_INVALID, EXIT_ABORT = 0, 1, 2, 3


class _Fail(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


def _load_correlation(path):
    try:
        return Correlation.load(path)
    except OSError as exc:
        raise _Fail(EXIT_IO, f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise _Fail(EXIT_IO, f"{path}: malformed JSON: {exc}") from exc
    except CorrelationError as exc:
        raise _Fail(EXIT_INVALID, f"{path}: {exc}") from exc


def _write_text(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise _Fail(EXIT_IO, f"cannot write {path}: {exc}") from exc


# ----------------------------------------------------------------- commands

def cmd_check_nosig(args):
    p = _load_correlation(args.input)
    report = check_no_signaling(p, tol=args.tol)
    print(report)
    return EXIT_OK if report.passed else EXIT_INVALID


def cmd_total_correlation(args):
    p = _load_correlation(args.input)
    if args.inputs_dist == "uniform":
        q = None
    else:
        try:
            with open(args.inputs_dist, encoding="utf-8") as fh:
                q = np.asarray(json.load(fh), dtype=float)
        except (OSError, json.JSONDecodeError, ValueError) as exc:
            raise _Fail(EXIT_IO, f"cannot read input distribution: {exc}") from exc
        if q.size != math.prod(p.input_sizes):
            raise _Fail(EXIT_INVALID, f"input distribution has {q.size} entries, need {math.prod(p.input_sizes)}")
    try:
        s = embed_cq(p, q)
    except CorrelationError as exc:
        raise _Fail(EXIT_INVALID, str(exc)) from exc
    m = p.num_parties
    value = total_correlation(s, [f"A{i + 1}" for i in range(m)], [f"X{i + 1}" for i in range(m)])
    print(f"{value:.12f}")
    return EXIT_OK


def _read_overlay(path, rows):
    """Interpolate an external ``(x, lower_bound)`` CSV onto the sweep parameters."""
    try:
        with open(path, encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            data = [(float(r[0]), float(r[-1])) for r in reader if r]
    except (OSError, StopIteration, ValueError, IndexError) as exc:
        raise _Fail(EXIT_IO, f"cannot read overlay {path}: {exc}") from exc
    if len(header) < 2 or not data:
        raise _Fail(EXIT_IO, f"overlay {path} needs two columns and at least one row")
    data.sort()
    xs, ys = np.array([d[0] for d in data]), np.array([d[1] for d in data])
    out = []
    for param, _, _ in rows:
        inside = xs[0] - 1e-12 <= param <= xs[-1] + 1e-12
        out.append(float(np.interp(param, xs, ys)) if inside else None)
    return out


def cmd_figure(args):
    which = "fig2-attack1" if args.which == "fig2" else args.which
    if args.grid_steps < 2:
        raise _Fail(EXIT_INVALID, "--grid-steps must be at least 2")
    result = attacks.figure_sweep(which, steps=args.grid_steps, workers=args.workers)
    overlay = _read_overlay(args.overlay, result.rows) if args.overlay else None
    _write_text(args.out, result.to_csv(overlay))
    return EXIT_OK


def cmd_verify_identities(args):
    if args.trials < 1:
        raise _Fail(EXIT_INVALID, "--trials must be at least 1")
    results = suites.run_all(args.trials, args.seed, corrupted=args.inject_corruption)
    for r in results:
        print(r)
    return EXIT_OK if all(r.passed for r in results) else EXIT_INVALID


def cmd_simulate(args):
    try:
        cfg = ProtocolConfig.load(args.config)
    except OSError as exc:
        raise _Fail(EXIT_IO, f"cannot read config: {exc}") from exc
    except (json.JSONDecodeError, CorrelationError, ProtocolError, TypeError, ValueError) as exc:
        raise _Fail(EXIT_IO, f"invalid config: {exc}") from exc
    if args.threshold is not None:
        cfg.win_threshold = args.threshold
    try:
        stats = run_rmw18(cfg, workers=args.workers)
    except ProtocolError as exc:
        raise _Fail(EXIT_INVALID, str(exc)) from exc
    _write_text(args.out, stats.to_json())
    if args.out not in (None, "-"):
        win = "n/a" if stats.empirical_win is None else f"{stats.empirical_win:.6f}"
        print(f"rounds={stats.num_rounds} tested={stats.rounds_tested} win={win} aborted={stats.aborted}")
    return EXIT_ABORT if stats.aborted else EXIT_OK


PRESETS = ("ghz", "isotropic", "dephasing", "uniform", "classical", "bell-dephasing")


def preset_correlation(name, param=None):
    if name == "ghz":
        return attacks.isotropic_correlation(0.0)
    if name == "isotropic":
        return attacks.isotropic_correlation(0.0 if param is None else param)
    if name == "dephasing":
        s = math.sqrt(2) if param is None else param
        c, q = attacks.dephasing_parameters(s)
        rho, _ = attacks.dephasing_state(c)
        from .correlations import from_state_and_povms
        return from_state_and_povms(rho, attacks.dephasing_measurements(c, q))
    if name == "bell-dephasing":
        s = 2 * math.sqrt(2) if param is None else param
        c, q = attacks.diqkd_parameters(s)
        rho, _ = attacks.dephased_bell_state(c)
        from .correlations import from_state_and_povms
        return from_state_and_povms(rho, attacks.diqkd_measurements(c, q))
    if name == "uniform":
        return Correlation.uniform((2, 2, 2), (2, 3, 2))
    if name == "classical":
        # optimal deterministic strategy for the tripartite parity-CHSH game
        from .games import classical_parity_chsh_optimum
        _, strategy = classical_parity_chsh_optimum()
        return Correlation.deterministic(strategy, (2, 2, 2), (2, 3, 2))
    raise ValueError(name)


def cmd_export_correlation(args):
    try:
        p = preset_correlation(args.preset, args.param)
    except ValueError as exc:
        raise _Fail(EXIT_INVALID, str(exc)) from exc
    _write_text(args.out, p.to_json() + "\n")
    return EXIT_OK


# ------------------------------------------------------------------ parser

def build_parser():
    parser = argparse.ArgumentParser(prog="inlbound", description=(
        "Intrinsic non-locality upper bounds for device-independent conference key agreement."))
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check-nosig", help="check a correlation for no-signaling")
    p.add_argument("input")
    p.add_argument("--tol", type=float, default=1e-10)
    p.set_defaults(func=cmd_check_nosig)

    p = sub.add_parser("total-correlation", help="I(A1;...;AM|X) of a correlation in bits")
    p.add_argument("input")
    p.add_argument("--inputs-dist", default="uniform",
                   help="'uniform' or a JSON file with the input distribution")
    p.add_argument("--extension", choices=["trivial"], default="trivial")
    p.set_defaults(func=cmd_total_correlation)

    p = sub.add_parser("figure", help="write upper-bound curve data as CSV")
    p.add_argument("which", choices=["fig2", *attacks.FIGURES])
    p.add_argument("--grid-steps", type=int, default=100)
    p.add_argument("--out", default="-")
    p.add_argument("--overlay", help="CSV (x, lower_bound) interpolated onto the parameter column")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_figure)

    p = sub.add_parser("verify-identities", help="run the chain-rule and no-signaling suites")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--inject-corruption", action="store_true",
                   help="evaluate one side on a perturbed state (negative control)")
    p.set_defaults(func=cmd_verify_identities)

    p = sub.add_parser("simulate", help="simulate the conference key protocol")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default="-")
    p.add_argument("--threshold", type=float, help="override the abort threshold")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("export-correlation", help="write a built-in device as correlation JSON")
    p.add_argument("preset", choices=PRESETS)
    p.add_argument("--param", type=float, help="noise p (isotropic) or Bell value S (dephasing)")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_export_correlation)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; usage errors count as parse errors here
        return EXIT_OK if exc.code == 0 else EXIT_IO
    try:
        return args.func(args)
    except _Fail as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
