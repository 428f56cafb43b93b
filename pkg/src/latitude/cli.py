"""Command line entry point: ``latitude {factorize,synth,eval,bench}``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace

import numpy as np

from .baselines import METHODS
from .io import CsvParseError, PreprocessSpec, load_csv, preprocess, save_csv
from .matrix import frobenius_error
from .nmf import NmfConfig
from .solver import SolverConfig, latitude_fit
from .synth import AXES, SynthSpec, gen_planted, sweep

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3

MODE_NAMES = {"mixed": "mixed", "pure-subtropical": "pure_subtropical",
              "pure-nmf": "pure_nmf", "alpha-nmf": "alpha_scaled_nmf_only"}


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _csv_list(cast):
    def parse(text):
        try:
            return [cast(t) for t in text.split(",") if t.strip()]
        except ValueError:
            raise argparse.ArgumentTypeError(f"invalid list {text!r}") from None
    return parse


def _solver_config(args, k) -> SolverConfig:
    return SolverConfig(
        k=k, niter=args.niter, M=args.M, seed=args.seed, init_mode=args.init,
        nmf_config=NmfConfig(k=k, max_iterations=args.nmf_iterations, seed=args.seed),
        n_jobs=args.n_jobs, block_size=args.block_size,
    )


def _add_solver_args(p, niter=40):
    p.add_argument("--niter", type=int, default=niter)
    p.add_argument("--M", type=float, default=5.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--init", choices=("nmf", "random"), default="nmf")
    p.add_argument("--nmf-iterations", type=int, default=100)
    p.add_argument("--n-jobs", type=int, default=1, help="worker threads for the column/row sweeps")
    p.add_argument("--block-size", type=int, default=128)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="latitude", description="Mixed linear-tropical matrix factorization")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("factorize", help="fit a mixed factorization to a CSV matrix")
    p.add_argument("--input", required=True)
    p.add_argument("--k", type=int, default=10)
    _add_solver_args(p)
    p.add_argument("--preprocess", default="", help="comma list of minsub,stddiv,meancenter")
    p.add_argument("--sample-std", action="store_true", help="use the n-1 denominator for stddiv")
    p.add_argument("--out-prefix", required=True)

    p = sub.add_parser("synth", help="generate a planted synthetic matrix")
    p.add_argument("--mode", choices=tuple(MODE_NAMES), default="mixed")
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--m", type=int, default=160)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--density", type=float, default=0.2)
    p.add_argument("--noise", type=float, default=0.01)
    p.add_argument("--param-range", type=float, default=5.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-prefix", required=True)

    p = sub.add_parser("eval", help="sweep one data parameter and compare methods")
    p.add_argument("--axis", choices=AXES, required=True)
    p.add_argument("--values", type=_csv_list(float), required=True)
    p.add_argument("--methods", type=_csv_list(str), default=list(METHODS))
    p.add_argument("--repeats", type=int, default=10)
    p.add_argument("--mode", choices=tuple(MODE_NAMES), default="mixed")
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--m", type=int, default=160)
    p.add_argument("--k", type=int, default=5, help="planted rank (the swept value on the rank axis)")
    p.add_argument("--fit-rank", type=int, default=None, help="fitted rank; defaults to the planted rank")
    p.add_argument("--density", type=float, default=0.2)
    p.add_argument("--noise", type=float, default=0.01)
    p.add_argument("--param-range", type=float, default=5.0)
    _add_solver_args(p)
    p.add_argument("--out", required=True)

    p = sub.add_parser("bench", help="per-iteration runtime as the row count grows")
    p.add_argument("--sizes", type=_csv_list(int), default=[250, 500, 1000])
    p.add_argument("--m", type=int, default=200)
    p.add_argument("--k", type=int, default=10)
    _add_solver_args(p, niter=3)
    p.add_argument("--out", required=True)
    return parser


def cmd_factorize(args) -> int:
    try:
        A, _ = load_csv(args.input)
    except OSError as exc:
        raise DataError(str(exc)) from exc
    spec = PreprocessSpec.parse(args.preprocess, std_ddof=1 if args.sample_std else 0)
    A = preprocess(A, spec)
    if np.any(A < 0):
        raise DataError("input has negative entries; try --preprocess minsub")
    if not 1 <= args.k <= min(A.shape):
        raise UsageError(f"--k must lie in [1, {min(A.shape)}]")
    fact, report = latitude_fit(A, _solver_config(args, args.k))
    approx = fact.product()
    if not np.all(np.isfinite(approx)):
        raise FloatingPointError("non-finite reconstruction")
    absolute, relative = frobenius_error(A, approx)

    P = args.out_prefix
    save_csv(f"{P}.B.csv", fact.B)
    save_csv(f"{P}.C.csv", fact.C)
    save_csv(f"{P}.co.csv", fact.co)
    save_csv(f"{P}.ro.csv", fact.ro)
    save_csv(f"{P}.alpha.csv", fact.alpha())
    out = {
        "k": args.k, "niter": args.niter, "M": args.M, "seed": args.seed, "init_mode": args.init,
        "preprocess": args.preprocess,
        "abs_error": absolute, "rel_error": relative,
        "best_error": report.best_error, "best_iteration": report.best_iteration,
        "initial_error": report.initial_error, "init_factor_error": report.init_factor_error,
        "error_trace": report.error_trace.tolist(),
        "seconds_per_iteration": report.wall_time_per_iteration.tolist(),
    }
    with open(f"{P}.report.json", "w") as fh:
        json.dump(out, fh, indent=2)
        fh.write("\n")
    print(f"abs_error={absolute:.6g} rel_error={relative:.6g} best_iteration={report.best_iteration}")
    return EXIT_OK


def cmd_synth(args) -> int:
    spec = SynthSpec(n=args.n, m=args.m, k_true=args.k, density=args.density, noise_sigma=args.noise,
                     param_range=args.param_range, mode=MODE_NAMES[args.mode], seed=args.seed)
    clean, noisy, truth = gen_planted(spec)
    P = args.out_prefix
    save_csv(f"{P}.clean.csv", clean)
    save_csv(f"{P}.noisy.csv", noisy)
    save_csv(f"{P}.truth.B.csv", truth.B)
    save_csv(f"{P}.truth.C.csv", truth.C)
    save_csv(f"{P}.truth.co.csv", truth.co)
    save_csv(f"{P}.truth.ro.csv", truth.ro)
    return EXIT_OK


def cmd_eval(args) -> int:
    unknown = [m for m in args.methods if m not in METHODS]
    if unknown:
        raise UsageError(f"unknown methods {unknown}; choose from {','.join(METHODS)}")
    ranks = [args.fit_rank] if args.fit_rank else ([int(v) for v in args.values] if args.axis == "rank" else [args.k])
    if "lattrunc" in args.methods and min(ranks) < 2:
        raise UsageError("lattrunc needs a fitted rank of at least 2")
    base = SynthSpec(n=args.n, m=args.m, k_true=args.k, density=args.density, noise_sigma=args.noise,
                     param_range=args.param_range, mode=MODE_NAMES[args.mode], seed=args.seed)
    table = sweep(base, args.axis, args.values, args.methods, args.repeats,
                  solver_config=_solver_config(args, args.fit_rank or args.k), fit_rank=args.fit_rank)
    table.to_csv(args.out)
    for (value, method), (mean, std, count) in sorted(table.summary().items()):
        print(f"{args.axis}={value:g} {method:9s} rel_error={mean:.4f} +/- {2 * std:.4f} (n={count})")
    return EXIT_OK


def bench_slope(sizes, seconds) -> float:
    """Least-squares slope of log(seconds) against log(n)."""
    return float(np.polyfit(np.log(sizes), np.log(seconds), 1)[0])


def cmd_bench(args) -> int:
    rows = []
    for n in args.sizes:
        spec = SynthSpec(n=n, m=args.m, k_true=args.k, seed=args.seed)
        _, noisy, _ = gen_planted(spec)
        _, report = latitude_fit(noisy, _solver_config(args, args.k))
        rows.append((n, args.m, args.k, float(np.median(report.wall_time_per_iteration))))
        print(f"n={n} seconds_per_iteration={rows[-1][3]:.4f}")
    with open(args.out, "w") as fh:
        fh.write("n,m,k,seconds_per_iteration\n")
        for n, m, k, sec in rows:
            fh.write(f"{n},{m},{k},{sec:.6f}\n")
    if len(rows) >= 2:
        print(f"log-log slope: {bench_slope([r[0] for r in rows], [r[3] for r in rows]):.3f}")
    return EXIT_OK


COMMANDS = {"factorize": cmd_factorize, "synth": cmd_synth, "eval": cmd_eval, "bench": cmd_bench}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"latitude {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, CsvParseError, OSError) as exc:
        print(f"latitude {args.command}: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"latitude {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"latitude {args.command}: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
