"""Command-line front end.

Exit status: 0 on success, 2 for invalid flags or input, 3 for runtime
failures (I/O and anything unexpected).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from contextlib import contextmanager

from . import __version__
from .bench import METHODS, power_grid, screen_all_pairs, write_power_csv
from .errors import BetError
from .expansion import (EMPIRICAL, KNOWN_CDF, binary_expand, empirical_copula,
                        known_cdf_copula, read_sample_csv, read_table, uniform_cdf,
                        write_sample_csv)
from .generators import SCENARIOS, ScenarioSpec, sample_bex, sample_null, sample_scenario
from .inference import max_bet, two_stage_bet
from .interactions import InteractionIndex

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 2, 3
WORKERS_ENV = "BET_WORKERS"

log = logging.getLogger("bet")


class UsageError(BetError):
    pass


def _depth_pair(text: str) -> tuple[int, int]:
    try:
        parts = [int(t) for t in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"--depth expects d or d1,d2, got {text!r}") from None
    if len(parts) == 1:
        parts *= 2
    if len(parts) != 2 or min(parts) < 1:
        raise argparse.ArgumentTypeError(f"--depth expects positive d or d1,d2, got {text!r}")
    return parts[0], parts[1]


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return value


def _alpha(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError(f"alpha must lie in (0, 1), got {text!r}")
    return value


def _levels(text: str) -> list[int]:
    out = []
    try:
        for part in text.split(","):
            if "-" in part:
                lo, hi = (int(t) for t in part.split("-"))
                out.extend(range(lo, hi + 1))
            else:
                out.append(int(part))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad level list {text!r}") from None
    if not out or any(not 1 <= lv <= 10 for lv in out):
        raise argparse.ArgumentTypeError("levels must lie in 1..10")
    return out


def _choice_list(choices):
    def parse(text: str) -> list[str]:
        items = [t.strip() for t in text.split(",") if t.strip()]
        bad = [t for t in items if t not in choices]
        if bad or not items:
            raise argparse.ArgumentTypeError(
                f"invalid choice {', '.join(bad) or text!r}; choose from {', '.join(choices)}")
        return items
    return parse


def _default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bet", description="Binary expansion testing of independence.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_output(p, formats=True):
        p.add_argument("-o", "--output", help="output file (default: stdout)")
        if formats:
            p.add_argument("--format", choices=("csv", "json"), default="csv")

    def add_marginals(p):
        p.add_argument("--marginals", choices=("empirical", "known:uniform"), default="empirical")
        p.add_argument("--ties", choices=("error", "random"), default="error")
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("test", help="test independence of two columns")
    p.add_argument("input")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--depth", type=_depth_pair, help="single-depth Max BET at d or d1,d2")
    g.add_argument("--dmax", type=_positive_int, default=4, help="two-stage search depth (default 4)")
    add_marginals(p)
    p.add_argument("--method", choices=("exact", "normal"), default="exact")
    p.add_argument("--continuity", action="store_true", help="continuity-corrected normal z")
    p.add_argument("--alpha", type=_alpha, default=0.1)
    p.add_argument("--plot", help="write an SVG of the strongest interaction")
    add_output(p)

    p = sub.add_parser("simulate", help="draw a sample from a generator")
    p.add_argument("--scenario", required=True, choices=SCENARIOS + ("bex", "null"))
    p.add_argument("--level", type=_positive_int, default=1,
                   help="noise level 1..10, or the BEX level for --scenario bex")
    p.add_argument("--n", type=_positive_int, default=128)
    p.add_argument("--seed", type=int, default=0)
    add_output(p, formats=False)

    p = sub.add_parser("power", help="Monte-Carlo power grid")
    p.add_argument("--scenario", type=_choice_list(SCENARIOS + ("null",)), default=list(SCENARIOS))
    p.add_argument("--method", type=_choice_list(METHODS), default=["bet-two-stage"])
    p.add_argument("--levels", type=_levels, default=list(range(1, 11)))
    p.add_argument("--n", type=_positive_int, default=128)
    p.add_argument("--alpha", type=_alpha, default=0.1)
    p.add_argument("--reps", type=_positive_int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=_positive_int, default=None)
    p.add_argument("--plot", help="write an SVG of the power curves")
    add_output(p, formats=False)

    p = sub.add_parser("screen", help="all-pairs screen of a variables-in-columns CSV")
    p.add_argument("input")
    p.add_argument("--depth", type=_positive_int, default=2)
    p.add_argument("--alpha", type=_alpha, default=0.1)
    p.add_argument("--method", choices=("normal", "exact"), default="normal")
    p.add_argument("--ties", choices=("error", "random"), default="error")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=_positive_int, default=None)
    add_output(p)

    p = sub.add_parser("plot-region", help="SVG of interaction regions over the copula")
    p.add_argument("input")
    p.add_argument("--depth", type=_depth_pair, default=(2, 2))
    p.add_argument("--interaction", help='e.g. "A1A2B1"; omit for every interaction')
    add_marginals(p)
    p.add_argument("-o", "--output", required=True)
    return parser


@contextmanager
def _sink(path):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _load_copula(args):
    sample = read_sample_csv(args.input)
    if args.marginals == "known:uniform":
        return known_cdf_copula(sample, uniform_cdf, uniform_cdf)
    return empirical_copula(sample, ties=args.ties, seed=args.seed)


def _fmt(value) -> str:
    return "" if value is None else repr(value)


def format_test_csv(payload: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["interaction", "depth", "s", "z", "p", "method"])
    for r in payload["per_interaction"]:
        w.writerow([r["interaction"], r["depth"], r["s"], _fmt(r["z"]), repr(r["p"]), r["method"]])
    buf.write("\n")
    w.writerow(["strongest", "s", "z", "p_raw", "p_adjusted", "n_tests", "d1", "d2", "d_max",
                "reject"])
    w.writerow([payload["strongest"], payload["s"], _fmt(payload["z"]), repr(payload["p_raw"]),
                repr(payload["p_adjusted"]), payload["n_tests"], payload["d1"], payload["d2"],
                _fmt(payload["d_max"]), "true" if payload["reject"] else "false"])
    return buf.getvalue()


def cmd_test(args) -> int:
    cop = _load_copula(args)
    provenance = KNOWN_CDF if args.marginals == "known:uniform" else EMPIRICAL
    if args.depth is not None:
        d1, d2 = args.depth
        bu, bv = binary_expand(cop, max(d1, d2))
        res = max_bet(bu, bv, d1, d2, provenance, args.method, args.continuity)
    else:
        bu, bv = binary_expand(cop, args.dmax)
        res = two_stage_bet(bu, bv, args.dmax, provenance, args.method, args.continuity)
    payload = res.to_dict()
    payload["n"] = cop.n
    payload["alpha"] = args.alpha
    payload["reject"] = res.p_adjusted <= args.alpha
    with _sink(args.output) as fh:
        if args.format == "json":
            json.dump(payload, fh, indent=2)
            fh.write("\n")
        else:
            fh.write(format_test_csv(payload))
    if args.plot:
        from .plotting import emit_region_plot
        emit_region_plot(cop, res.interaction, args.plot)
    return EXIT_OK


def cmd_simulate(args) -> int:
    if args.scenario == "bex":
        sample = sample_bex(args.level, args.n, args.seed)
    elif args.scenario == "null":
        sample = sample_null(args.n, args.seed)
    else:
        if args.level > 10:
            raise UsageError("--level must lie in 1..10 for noise scenarios")
        sample = sample_scenario(ScenarioSpec(args.scenario, args.level), args.n, args.seed)
    with _sink(args.output) as fh:
        write_sample_csv(sample, fh)
    return EXIT_OK


def cmd_power(args) -> int:
    workers = args.workers or _default_workers()
    rows = power_grid(args.scenario, args.method, args.levels, args.n, args.alpha,
                      args.reps, args.seed, workers)
    with _sink(args.output) as fh:
        write_power_csv(rows, fh)
    if args.plot:
        from .plotting import plot_power_curves
        plot_power_curves(rows, args.plot)
    return EXIT_OK


def cmd_screen(args) -> int:
    names, data = read_table(args.input)
    workers = args.workers or _default_workers()
    report = screen_all_pairs(data.T, names, args.depth, args.alpha, args.method,
                              workers, args.ties, args.seed)
    with _sink(args.output) as fh:
        if args.format == "json":
            json.dump({"alpha": report.alpha, "depth": report.depth,
                       "n_pairs": report.n_pairs, "dropped": list(report.dropped),
                       "rows": [dict(zip(("var_a", "var_b", "s", "interaction", "p_raw",
                                          "p_adjusted", "significant"),
                                         (r.var_a, r.var_b, r.s, r.interaction, r.p_raw,
                                          r.p_adjusted, r.significant)))
                                for r in report.rows]}, fh, indent=2)
            fh.write("\n")
        else:
            fh.write(report.to_csv())
    return EXIT_OK


def cmd_plot_region(args) -> int:
    from .plotting import emit_region_panels, emit_region_plot
    cop = _load_copula(args)
    d1, d2 = args.depth
    if args.interaction:
        try:
            idx = InteractionIndex.parse(args.interaction, d1, d2)
        except ValueError as exc:
            raise UsageError(f"--interaction: {exc}") from None
        emit_region_plot(cop, idx, args.output)
    else:
        emit_region_panels(cop, d1, d2, args.output)
    return EXIT_OK


COMMANDS = {
    "test": cmd_test,
    "simulate": cmd_simulate,
    "power": cmd_power,
    "screen": cmd_screen,
    "plot-region": cmd_plot_region,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except BetError as exc:
        print(f"bet {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"bet {args.command}: I/O error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as exc:  # noqa: BLE001 - mapped to the runtime exit status
        print(f"bet {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
