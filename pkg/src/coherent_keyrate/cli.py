"""``coherent-keyrate`` command line.

Exit codes: 0 success, 1 usage or parse error, 2 statistics or states that no
quantum state can produce.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import entanglement, qecsim
from .errors import (
    InconsistentStatistics,
    KeyRateError,
    NotHermitian,
    NotPositive,
    TraceNotOne,
)
from .finegrained import FineGrainedStats, bb84_opt_keyrate, sixstate_opt_keyrate
from .keyrate import bb84_keyrate, bb84_worstcase_state, error_rates, keyrate_of_state, sixstate_keyrate
from .mismatch import (
    DetectorModel,
    discard_keyrate_k1,
    koashi_keyrate_k2,
    mismatch_keyrate,
    mismatch_pipeline,
)
from .qstate import read_state_file
from .sweeps import format_csv, format_number, parse_csv, sweep_alpha, sweep_mismatch
from .svgplot import render_svg

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

JOBS_ENV = "COHERENT_KEYRATE_JOBS"
EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _default_jobs() -> int:
    raw = os.environ.get(JOBS_ENV, "1")
    try:
        jobs = int(raw)
    except ValueError:
        raise UsageError(f"{JOBS_ENV} must be an integer, got {raw!r}") from None
    if jobs < 1:
        raise UsageError(f"{JOBS_ENV} must be >= 1, got {jobs}")
    return jobs


# ---------------------------------------------------------------------------
# output helpers

def _emit(out, key, value):
    if isinstance(value, float):
        value = format_number(value)
    print(f"{key}: {value}", file=out)


def _emit_report(out, report):
    _emit(out, "protocol", report.protocol)
    _emit(out, "rate", report.rate)
    _emit(out, "coherence_term", report.coherence_term)
    _emit(out, "reconciliation_term", report.reconciliation_term)
    if report.witness is not None:
        ev = np.linalg.eigvalsh(report.witness.matrix)[::-1]
        _emit(out, "witness_eigenvalues", ", ".join(format_number(max(v, 0.0)) for v in ev))


def _write_csv(path, columns, rows):
    Path(path).write_text(format_csv(columns, rows), newline="\n")


def _need(args, *names):
    missing = [n for n in names if getattr(args, n, None) is None]
    if missing:
        flags = ", ".join("--" + n.replace("_", "-") for n in missing)
        raise UsageError(f"{args.command} needs {flags}")


def _fine_stats(args, e_p, e_y=None):
    if args.alpha is not None:
        _need(args, "eb")
        return FineGrainedStats.from_alpha(args.alpha, e_b=args.eb, e_p=e_p, e_y=e_y)
    _need(args, "m00", "m11", "m22", "m33")
    return FineGrainedStats(args.m00, args.m11, args.m22, args.m33, e_p=e_p, e_y=e_y)


# ---------------------------------------------------------------------------
# commands

def cmd_bb84(args, out):
    _need(args, "eb", "ep")
    report = bb84_keyrate(args.eb, args.ep)
    _emit_report(out, report)
    return report, ("e_b", "e_p"), (args.eb, args.ep)


def cmd_bb84_opt(args, out):
    _need(args, "ep")
    stats = _fine_stats(args, args.ep)
    report = bb84_opt_keyrate(stats, method=args.method)
    _emit_report(out, report)
    _emit(out, "method", report.details["solution"].method)
    return report, ("m00", "m11", "m22", "m33", "e_p"), (*stats.diagonal, stats.e_p)


def cmd_six(args, out):
    _need(args, "ex", "ey", "ez")
    report = sixstate_keyrate(args.ex, args.ey, args.ez)
    _emit_report(out, report)
    _emit(out, "bell_weights", ", ".join(format_number(v) for v in report.details["bell_probs"].as_array()))
    return report, ("e_x", "e_y", "e_z"), (args.ex, args.ey, args.ez)


def cmd_six_opt(args, out):
    _need(args, "ex", "ey")
    stats = _fine_stats(args, args.ex, args.ey)
    report = sixstate_opt_keyrate(stats)
    _emit_report(out, report)
    return report, ("m00", "m11", "m22", "m33", "e_x", "e_y"), (*stats.diagonal, stats.e_p, stats.e_y)


def cmd_mismatch(args, out):
    _need(args, "ep", "eb")
    if args.x is None:
        _need(args, "eta0", "eta1")
        x = DetectorModel(args.eta0, args.eta1).x
    else:
        x = args.x
    report = mismatch_keyrate(x, args.ep, args.eb)
    _emit_report(out, report)
    k1 = discard_keyrate_k1(x, args.ep, args.eb)
    k2 = koashi_keyrate_k2(x, args.ep, args.eb)
    _emit(out, "x", x)
    _emit(out, "K1", k1)
    _emit(out, "K2", k2)
    return report, ("x", "e_p", "e_b"), (x, args.ep, args.eb)


def _finish_sweep(args, out, result, title, x_label):
    text = result.to_csv()
    if args.csv:
        Path(args.csv).write_text(text, newline="\n")
    else:
        out.write(text)
    if args.svg:
        Path(args.svg).write_text(render_svg(result.columns, result.rows, title=title, x_label=x_label))


def cmd_sweep_alpha(args, out):
    jobs = args.jobs if args.jobs is not None else _default_jobs()
    result = sweep_alpha(args.e, args.start, args.stop, args.steps, jobs=jobs)
    _finish_sweep(args, out, result, f"key rates vs alpha (e = {format_number(args.e)})", "alpha")


def cmd_sweep_mismatch(args, out):
    jobs = args.jobs if args.jobs is not None else _default_jobs()
    result = sweep_mismatch(args.ep, args.eb, args.start, args.stop, args.steps, jobs=jobs)
    title = f"key rates vs x (e_p = {format_number(args.ep)}, e_b = {format_number(args.eb)})"
    _finish_sweep(args, out, result, title, "x")


def cmd_analyze(args, out):
    _need(args, "state")
    rho = read_state_file(args.state)
    e_x, e_y, e_z = error_rates(rho)
    _emit(out, "e_x", e_x)
    _emit(out, "e_y", e_y)
    _emit(out, "e_z", e_z)
    _emit(out, "K_state", keyrate_of_state(rho).rate)
    # H(e) = H(1 - e), and Bob can flip his bit when e > 1/2
    _emit(out, "K_bb84", bb84_keyrate(min(e_z, 1 - e_z), min(e_x, 1 - e_x)).rate)
    stats = FineGrainedStats.from_state(rho)
    _emit(out, "K_bb84_opt", bb84_opt_keyrate(stats).rate)
    _emit(out, "K_six", sixstate_keyrate(e_x, e_y, e_z).rate)
    _emit(out, "K_six_opt", sixstate_opt_keyrate(stats).rate)
    _emit(out, "hashing_bound", entanglement.hashing_bound(rho))
    _emit(out, "devetak_winter", entanglement.devetak_winter_privacy(rho))
    cfg = entanglement.BasisSearchConfig(restarts=args.restarts, seed=args.seed)
    _emit(out, "K_max_bases", entanglement.max_keyrate_over_bases(rho, cfg)[0])
    _emit(out, "entanglement_of_formation", entanglement.entanglement_of_formation(rho))
    if args.eta0 is not None or args.eta1 is not None:
        _need(args, "eta0", "eta1")
        det = DetectorModel(args.eta0, args.eta1)
        rep = mismatch_pipeline(rho, det)
        _emit(out, "mismatch_x", det.x)
        _emit(out, "mismatch_gamma", rep.details["gamma"])
        _emit(out, "mismatch_e_p_double_prime", rep.details["e_p_double_prime"])
        _emit(out, "mismatch_e_p_prime", rep.details["e_p_prime"])
        _emit(out, "mismatch_e_b", rep.details["observed_e_b"])
        _emit(out, "K_mismatch", rep.rate)


def _adjacent_parity(n: int) -> qecsim.HashingMatrix:
    if n == 1:
        return qecsim.HashingMatrix(((1,),))
    return qecsim.HashingMatrix(tuple(tuple(int(k in (i, i + 1)) for k in range(n)) for i in range(n - 1)))


def cmd_qec_demo(args, out):
    if args.hashing:
        h = qecsim.HashingMatrix.read(args.hashing)
    elif args.n in (None, 3):
        h = qecsim.DEFAULT_HASHING
    else:
        h = _adjacent_parity(args.n)
    n = args.n if args.n is not None else h.n
    if args.state:
        rho = read_state_file(args.state)
    else:
        rho = bb84_worstcase_state(args.eb, args.ep if args.ep is not None else args.eb)
    classical = qecsim.classical_ec_run(rho, n, h)
    virtual = qecsim.virtual_qec_run(rho, n, h)
    _emit(out, "n", n)
    _emit(out, "hashing_rows", " ".join("".join(map(str, r)) for r in h.rows))
    _emit(out, "total_variation", classical.total_variation(virtual))
    _emit(out, "mismatch_classical", classical.mismatch_probability)
    _emit(out, "mismatch_virtual", virtual.mismatch_probability)
    _emit(out, "uncorrectable_probability", qecsim.uncorrectable_probability(rho, h))
    for s in sorted(virtual.syndromes):
        _emit(out, "syndrome_" + "".join(map(str, s)), virtual.syndromes[s])
    _emit(out, "ec_cost_per_pair", qecsim.ec_cost(rho))


def cmd_plot(args, out):
    result = parse_csv(Path(args.csv_in).read_text())
    svg = render_svg(result.columns, result.rows, title=args.title or "")
    if args.svg:
        Path(args.svg).write_text(svg)
    else:
        out.write(svg)


# ---------------------------------------------------------------------------
# parser

def _float_args(p, *names):
    for n in names:
        p.add_argument("--" + n, type=float, default=None)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML file with default values for any flag")

    parser = _Parser(prog="coherent-keyrate", description="Coherence-based QKD key rates.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, required=True)

    def add(name, func, help_):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.set_defaults(func=func)
        return p

    p = add("bb84", cmd_bb84, "1 - H(e_p) - H(e_b)")
    _float_args(p, "eb", "ep")
    p.add_argument("--csv")

    p = add("bb84-opt", cmd_bb84_opt, "BB84 rate from fine-grained Z statistics")
    _float_args(p, "m00", "m11", "m22", "m33", "ep", "eb", "alpha")
    p.add_argument("--method", choices=("auto", "numeric", "closed_form"), default="auto")
    p.add_argument("--csv")

    p = add("six", cmd_six, "six-state rate from three error rates")
    _float_args(p, "ex", "ey", "ez")
    p.add_argument("--csv")

    p = add("six-opt", cmd_six_opt, "six-state rate from fine-grained statistics")
    _float_args(p, "m00", "m11", "m22", "m33", "ex", "ey", "eb", "alpha")
    p.add_argument("--csv")

    p = add("mismatch", cmd_mismatch, "detector-mismatch rates K, K1, K2")
    _float_args(p, "x", "eta0", "eta1", "ep", "eb")
    p.add_argument("--csv")

    p = add("sweep-alpha", cmd_sweep_alpha, "rates over the unbalance alpha")
    p.add_argument("--e", type=float, default=0.03)
    p.add_argument("--start", type=float, default=0.38)
    p.add_argument("--stop", type=float, default=0.62)
    p.add_argument("--steps", type=int, default=25)
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--csv")
    p.add_argument("--svg")

    p = add("sweep-mismatch", cmd_sweep_mismatch, "rates over the mismatch ratio x")
    p.add_argument("--ep", type=float, default=0.05)
    p.add_argument("--eb", type=float, default=0.05)
    p.add_argument("--start", type=float, default=0.01)
    p.add_argument("--stop", type=float, default=0.5)
    p.add_argument("--steps", type=int, default=50)
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--csv")
    p.add_argument("--svg")

    p = add("analyze", cmd_analyze, "full report for a state file")
    p.add_argument("state", nargs="?")
    _float_args(p, "eta0", "eta1")
    p.add_argument("--restarts", type=int, default=entanglement.BasisSearchConfig.restarts)
    p.add_argument("--seed", type=int, default=0)

    p = add("qec-demo", cmd_qec_demo, "compare measured and coherent error correction")
    p.add_argument("--n", type=int, default=None, help="pair count (default: hashing width, else 3)")
    p.add_argument("--hashing", help="text file, one row of 0/1 characters per line")
    p.add_argument("--state")
    p.add_argument("--eb", type=float, default=0.1)
    p.add_argument("--ep", type=float, default=None)

    p = add("plot", cmd_plot, "render a sweep CSV as SVG")
    p.add_argument("csv_in", metavar="CSV")
    p.add_argument("--svg")
    p.add_argument("--title")
    return parser


def _subparser(parser, command):
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices[command]
    raise KeyError(command)


def _load_config(path, command, sub) -> dict:
    """Top-level keys plus the ``[<command>]`` table; flags given on the command line win."""
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except OSError as exc:
        raise UsageError(f"{path}: {exc.strerror}") from None
    except tomllib.TOMLDecodeError as exc:
        raise UsageError(f"{path}: {exc}") from None
    values = {k: v for k, v in doc.items() if not isinstance(v, dict)}
    values.update(doc.get(command, {}))
    known = {a.dest for a in sub._actions} - {"help", "config"}
    out = {}
    for key, v in values.items():
        dest = key.replace("-", "_")
        if dest not in known:
            raise UsageError(f"{path}: unknown option '{key}' for {command}")
        out[dest] = v
    return out


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.config:
            sub = _subparser(parser, args.command)
            sub.set_defaults(**_load_config(args.config, args.command, sub))
            args = parser.parse_args(argv)
        result = args.func(args, out)
        if result is not None and getattr(args, "csv", None):
            report, cols, vals = result
            _write_csv(
                args.csv,
                (*cols, "rate", "coherence_term", "reconciliation_term"),
                [(*vals, report.rate, report.coherence_term, report.reconciliation_term)],
            )
    except SystemExit as exc:
        return int(exc.code or 0)
    except UsageError as exc:
        print(f"coherent-keyrate: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InconsistentStatistics, NotPositive, NotHermitian, TraceNotOne) as exc:
        print(f"coherent-keyrate: infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (KeyRateError, ValueError, OSError) as exc:
        print(f"coherent-keyrate: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
