"""Command-line entry point: ``bdm <subcommand> [flags]``.

Output goes to ``--out`` when given, otherwise to a default file name in
$BDM_OUT_DIR when that is set, otherwise to stdout.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from . import verify as V
from .errors import BdmError, BudgetExceededError
from .field_oracle import DEFAULT_BUDGET, parse_multisequence, profile
from .gamma import GammaQuery, gamma_closed, gamma_enumerated_slot, _tail
from .mass import default_kmax, enumerate_states, run_to_column
from .simulation import simulate

OUT_DIR_ENV = "BDM_OUT_DIR"

SUITES = ("class-counts", "partition-bijection", "stationarity", "gamma", "bruteforce", "finite-n", "generations", "theta")


@dataclass
class RunConfig:
    command: str
    q: int | None = None
    M: int | None = None
    T: int | None = None
    t: int | None = None

    def validate(self):
        if self.q is not None and self.q < 2:
            raise ValueError("--q must be at least 2")
        if self.M is not None and self.M < 1:
            raise ValueError("--M must be at least 1")
        if self.M is not None:
            if self.T is not None and not 0 <= self.T <= self.M:
                raise ValueError(f"--T must lie in 0..{self.M}")
            if self.t is not None and not 1 <= self.t <= self.M + 1:
                raise ValueError(f"--t must lie in 1..{self.M + 1}")


def _frac(x):
    return [x.numerator, x.denominator]


def _emit(text: str, out: str | None, default_name: str):
    if out is None and os.environ.get(OUT_DIR_ENV):
        out = str(Path(os.environ[OUT_DIR_ENV]) / default_name)
    if out is None:
        sys.stdout.write(text)
        return
    path = Path(out)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def cmd_profile(args) -> int:
    text = Path(args.input).read_text() if args.input != "-" else sys.stdin.read()
    seq = parse_multisequence(text)
    prof = profile(seq)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "L", "d"])
    for n in range(seq.n + 1):
        w.writerow([n, prof.L[n], prof.d[n]])
    _emit(buf.getvalue(), args.out, "profile.csv")
    return 0


_VERIFY_DEFAULTS = {
    "class-counts": {"M": 2, "kmax": 40},
    "partition-bijection": {"M": 2, "kmax": 20},
    "stationarity": {"M": 2, "q": 2, "kmax": 30},
    "gamma": {"M": 2, "q": 2, "dmax": 4, "kmax": 40},
    "theta": {"M": 2, "q": 2, "dmax": 4, "kmax": 40},
    "bruteforce": {"M": 1, "q": 2, "n": 10},
    "finite-n": {"M": 1, "q": 2, "n": 12},
    "generations": {"M": 2, "n": 12},
}


def cmd_verify(args) -> int:
    p = dict(_VERIFY_DEFAULTS[args.suite])
    for key in ("M", "q", "n", "kmax", "dmax"):
        if getattr(args, key) is not None:
            p[key] = getattr(args, key)
    RunConfig("verify", p.get("q"), p.get("M")).validate()
    suite = args.suite
    if suite == "class-counts":
        rep = V.verify_class_counts(p["M"], p["kmax"])
    elif suite == "partition-bijection":
        rep = V.verify_partition_bijection(p["M"], p["kmax"])
    elif suite == "stationarity":
        rep = V.verify_stationarity(p["M"], p["q"], p["kmax"])
    elif suite == "gamma":
        rep = V.verify_gamma(p["M"], p["q"], p["dmax"], p["kmax"])
    elif suite == "theta":
        rep = V.verify_theta(p["M"], p["q"], p["dmax"], p["kmax"])
    elif suite == "bruteforce":
        try:
            rep = V.verify_bruteforce(p["q"], p["M"], p["n"], budget=args.budget, workers=args.threads)
        except BudgetExceededError as e:
            print(f"error: {e}; lower --n or raise --budget", file=sys.stderr)
            return 2
    elif suite == "finite-n":
        rep = V.verify_finite_n(p["M"], p["q"], p["n"])
    else:
        rep = V.verify_generations(p["M"], p["n"])
    _emit(rep.to_json(include_runtime=args.timing), args.out, f"verify-{suite}.json")
    print(f"{rep.campaign}: {rep.status} ({rep.checks} checks, {len(rep.residuals)} residuals)", file=sys.stderr)
    return 1 if rep.fails_process else 0


def cmd_gamma(args) -> int:
    cfg = RunConfig("gamma", args.q, args.M, args.T, args.t)
    cfg.validate()
    M, q = args.M, args.q
    kmax = args.kmax if args.kmax is not None else default_kmax(M)
    if args.d is not None:
        ds = [args.d]
    else:
        lo = args.dmin if args.dmin is not None else -4
        hi = args.dmax if args.dmax is not None else 4
        ds = list(range(lo, hi + 1))
    slots = [(T, t) for T in range(M + 1) for t in range(1, M + 2)]
    if args.T is not None:
        slots = [s for s in slots if s[0] == args.T]
    if args.t is not None:
        slots = [s for s in slots if s[1] == args.t]
    tail = _tail(q, M, kmax)
    buf = io.StringIO()
    buf.write(f"# q={q} M={M} K_max={kmax}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["d", "T", "t", "closed_num", "closed_den", "enum_num", "enum_den", "tail_num", "tail_den"])
    for T, t in slots:
        enum = gamma_enumerated_slot(q, M, T, t, kmax)
        for d in ds:
            closed = gamma_closed(GammaQuery(q, M, T, t, d))
            w.writerow([d, T, t, *_frac(closed), *_frac(enum.get(d, Fraction(0))), *_frac(tail)])
    _emit(buf.getvalue(), args.out, "gamma.csv")
    return 0


def cmd_enumerate(args) -> int:
    M = args.M
    T = args.T if args.T is not None else 0
    t = args.t if args.t is not None else M + 1
    RunConfig("enumerate", args.q, M, T, t).validate()
    kmax = args.kmax if args.kmax is not None else default_kmax(M)
    census = enumerate_states(M, T, t, kmax)
    _emit(census.to_csv(args.q), args.out, f"census-M{M}-T{T}-t{t}.csv")
    return 0


def cmd_mass(args) -> int:
    RunConfig("mass", args.q, args.M).validate()
    kmax = args.kmax if args.kmax is not None else default_kmax(args.M)
    mu = run_to_column(args.M, args.q, args.n, kmax)
    _emit(mu.to_csv(), args.out, f"mass-M{args.M}-q{args.q}-n{args.n}.csv")
    return 0


def cmd_simulate(args) -> int:
    RunConfig("simulate", args.q, args.M).validate()
    stats = simulate(args.q, args.M, args.n, args.runs, args.seed, threads=args.threads)
    T, t = stats.final_slot
    buf = io.StringIO()
    buf.write(
        f"# q={stats.q} M={stats.M} n={stats.n} runs={stats.runs} seed={stats.seed} "
        f"generator={stats.generator} block_size={stats.block_size} final_slot=({T},{t})\n"
    )
    buf.write(
        f"# max_ratio_mean={stats.max_ratio.mean():.6f} min_ratio_mean={stats.min_ratio.mean():.6f} "
        f"log_law_constant={stats.log_law_constant:.6f}\n"
    )
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["d", "count", "closed_num", "closed_den"])
    for d, c in stats.histogram.items():
        w.writerow([d, c, *_frac(gamma_closed(GammaQuery(stats.q, stats.M, T, t, d)))])
    _emit(buf.getvalue(), args.out, f"simulate-M{args.M}-q{args.q}-n{args.n}-seed{args.seed}.csv")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bdm", description="Exact battery discharge model toolkit")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, *names, q=2, M=1):
        # verify leaves q and M unset so each suite can pick its own defaults
        if "q" in names:
            p.add_argument("--q", type=int, default=q)
        if "M" in names:
            p.add_argument("--M", type=int, default=M)
        for name in ("n", "kmax", "T", "t", "d", "dmin", "dmax"):
            if name in names:
                p.add_argument(f"--{name}", type=int, default=None)
        p.add_argument("--out", default=None)

    p = sub.add_parser("profile", help="linear complexity profile of a multisequence file")
    p.add_argument("input")
    common(p)
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("verify", help="run a verification campaign")
    p.add_argument("suite", choices=SUITES)
    common(p, "q", "M", "n", "kmax", "dmax", q=None, M=None)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.add_argument("--timing", action="store_true", help="include wall-clock runtime in the report")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("gamma", help="closed and enumerated gamma(d, T, t)")
    common(p, "q", "M", "kmax", "T", "t", "d", "dmin", "dmax")
    p.set_defaults(func=cmd_gamma)

    p = sub.add_parser("enumerate", help="census of one slot up to a class cutoff")
    common(p, "q", "M", "kmax", "T", "t")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("mass", help="exact distribution after n columns")
    common(p, "q", "M", "n", "kmax")
    p.set_defaults(func=cmd_mass, n=10)

    p = sub.add_parser("simulate", help="Monte Carlo drain histogram")
    common(p, "q", "M", "n")
    p.set_defaults(n=10)
    p.add_argument("--runs", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_simulate)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, BdmError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
