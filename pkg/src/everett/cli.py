"""Command-line entry point: ``everett {verify,sweep,tie,lln}``.

Exit codes: 0 success, 1 a verification or invariant check failed, 2 bad
arguments or an unusable output path.
"""
from __future__ import annotations

import argparse
import csv
import io
import os
import sys
from fractions import Fraction
from pathlib import Path

from everett import experiments, linalg, oracle
from everett.scenario import build_total_U
from everett.weights import WeightTable, as_probability, as_rational

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

WEIGHT_HEADER = ("N", "nu", "p1", "k", "phi_k", "weight", "mode")
VERIFY_HEADER = ("check_name", "deviation", "pass")


class UsageError(Exception):
    pass


def fmt(x) -> str:
    """Stable CSV text: rationals as ``num/den``, floats with 17 significant digits."""
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def weight_rows(table: WeightTable) -> list[tuple]:
    exact = table.mode == "exact"
    rows = []
    for k, w in enumerate(table.weights):
        phi = table.phi(k)
        rows.append((table.n, table.nu, table.p1 if exact else float(table.p1), k,
                     phi if exact else float(phi), w, table.mode))
    return rows


def to_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(x) for x in r])
    return buf.getvalue()


# -- argument types -------------------------------------------------------------

def _probability(text: str):
    try:
        value = as_probability(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"invalid probability {text!r}: {exc}") from None
    return ("rational" if "/" in text else "decimal"), value


def _positive_rational(text: str) -> Fraction:
    try:
        value = as_rational(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"invalid number {text!r}") from None
    if value <= 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return value


def _rational_list(text: str) -> list[Fraction]:
    return [_positive_rational(t) for t in text.split(",") if t.strip()]


def _int_list(text: str) -> list[int]:
    try:
        values = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not values or any(v < 1 for v in values):
        raise argparse.ArgumentTypeError("ensemble sizes must be positive integers")
    return values


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="everett", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="brute-force oracle checks on random small scenarios")
    v.add_argument("--max-n", type=_positive_int, default=3)
    v.add_argument("--max-nu", type=_positive_int, default=3)
    v.add_argument("--trials", type=_positive_int, default=5, help="random amplitude pairs per (N, nu)")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--corrupt", type=float, default=None, metavar="EPS",
                   help="negative control: shift one entry of the total unitary by EPS")
    v.add_argument("--out", default="verify.csv")

    s = sub.add_parser("sweep", help="weight tables along a list of ensemble sizes")
    s.add_argument("--p1", type=_probability, required=True, help="|c1|^2 as 0.3 or 3/10")
    s.add_argument("--nu", type=_positive_int, required=True)
    s.add_argument("--n", dest="n_list", type=_int_list, default=list(experiments.DEFAULT_N_LIST))
    s.add_argument("--mode", choices=("exact", "float"), default=None,
                   help="default: exact for rational --p1, float otherwise")
    s.add_argument("--eps", type=_positive_rational, default=None, help="tail half-width (default: derived)")
    s.add_argument("--out", default="sweep.csv")
    s.add_argument("--summary", default=None, help="per-N summary CSV (default: <out>_summary.csv)")

    t = sub.add_parser("tie", help="the p1 = 1/2 tie for odd nu")
    t.add_argument("--nu", type=_positive_int, required=True)
    t.add_argument("--n", dest="n_list", type=_int_list, default=[10, 100, 1000])
    t.add_argument("--mode", choices=("exact", "float"), default="exact")
    t.add_argument("--out", default="tie.csv")

    ln = sub.add_parser("lln", help="binomial tail sums outside N p1 +/- N eps")
    ln.add_argument("--p1", type=_probability, required=True)
    ln.add_argument("--eps", dest="eps_list", type=_rational_list, required=True)
    ln.add_argument("--n", dest="n_list", type=_int_list, default=[100, 1000, 10_000])
    ln.add_argument("--mode", choices=("exact", "float"), default=None)
    ln.add_argument("--out", default="lln.csv")
    return parser


# -- output ---------------------------------------------------------------------

def _check_writable(path: str) -> Path:
    p = Path(path)
    parent = p.parent if str(p.parent) else Path(".")
    if p.is_dir():
        raise UsageError(f"output path {path} is a directory")
    if not parent.is_dir():
        raise UsageError(f"output directory {parent} does not exist")
    if not os.access(parent, os.W_OK) or (p.exists() and not os.access(p, os.W_OK)):
        raise UsageError(f"output path {path} is not writable")
    return p


def _write(path: Path, text: str) -> None:
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc}") from None


def _resolve_mode(p1_arg, mode: str | None) -> str:
    if mode is not None:
        return mode
    return "exact" if p1_arg[0] == "rational" else "float"


# -- subcommands ----------------------------------------------------------------

def cmd_verify(args) -> int:
    out = _check_writable(args.out)
    largest = (args.max_nu + 2) * 6 ** args.max_n
    if largest > linalg.max_dim():
        raise UsageError(f"N={args.max_n}, nu={args.max_nu} needs dimension {largest}, "
                         f"above the cap {linalg.max_dim()} (raise EW_MAX_DIM)")
    scenarios = oracle.random_scenarios(args.max_n, args.max_nu, args.trials, args.seed)
    rows, failed = [], 0
    seen: dict[tuple[int, int], int] = {}
    for scen in scenarios:
        key = (scen.n_systems, scen.resolution)
        trial = seen.get(key, 0)
        seen[key] = trial + 1
        u = None
        if args.corrupt is not None:
            u = oracle.corrupt(build_total_U(scen), args.corrupt)
        report = oracle.verify_scenario(scen, u)
        prefix = f"N{scen.n_systems}_nu{scen.resolution}_t{trial}/"
        rows.extend((prefix + name, dev, ok) for name, dev, ok in report.csv_rows())
        status = "pass" if report.passed else "FAIL"
        print(f"N={scen.n_systems} nu={scen.resolution} trial={trial} p1={scen.p1:.6f} "
              f"checks={len(report.checks)} {status} ({report.runtime_ms:.0f} ms)")
        for c in report.failures():
            print(f"    {c.name}: deviation {c.deviation:.3e} > {c.tol:.0e}")
        failed += not report.passed
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(VERIFY_HEADER)
    w.writerows(rows)
    _write(out, buf.getvalue())
    print(f"{len(scenarios) - failed}/{len(scenarios)} scenarios passed; report written to {out}")
    return EXIT_OK if failed == 0 else EXIT_FAIL


def cmd_sweep(args) -> int:
    out = _check_writable(args.out)
    summary_path = _check_writable(args.summary or str(out.with_name(out.stem + "_summary.csv")))
    mode = _resolve_mode(args.p1, args.mode)
    try:
        result = experiments.run_sweep(args.p1[1], args.nu, args.n_list, mode, args.eps)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    rows = [r for row in result.rows for r in weight_rows(row.table)]
    summary = []
    print(f"p1={fmt(result.p1)} nu={result.nu} mode={mode} "
          f"{experiments.describe_gap(result.p1, result.nu)} eps={fmt(result.epsilon)}"
          f"{' (default)' if result.epsilon_is_default else ''}")
    print(f"{'N':>8}  {'k_prime':>8}  {'mass_at_kprime':>24}  {'mass_elsewhere':>24}  {'lln_tail':>24}")
    for r in result.rows:
        kp = "+".join(str(k) for k in r.k_prime)
        summary.append((r.n, result.nu, result.p1 if mode == "exact" else float(result.p1), kp,
                        r.mass_at_kprime, r.mass_elsewhere, r.lln_tail, result.epsilon, mode))
        print(f"{r.n:>8}  {kp:>8}  {float(r.mass_at_kprime):>24.17g}  "
              f"{float(r.mass_elsewhere):>24.17g}  {float(r.lln_tail):>24.17g}")
    _write(out, to_csv(WEIGHT_HEADER, rows))
    _write(summary_path, to_csv(("N", "nu", "p1", "k_prime", "mass_at_kprime", "mass_elsewhere",
                                 "lln_tail", "epsilon", "mode"), summary))
    bad = result.bound_violations()
    norm_bad = [r.n for r in result.rows
                if (r.table.total() != 1 if mode == "exact" else abs(r.table.total() - 1) > 1e-9)]
    for n in bad:
        print(f"invariant failed: mass away from nearest bin exceeds tail sum at N={n}")
    for n in norm_bad:
        print(f"invariant failed: weights do not sum to one at N={n}")
    print(f"weights written to {out}; summary written to {summary_path}")
    return EXIT_OK if not bad and not norm_bad else EXIT_FAIL


def cmd_tie(args) -> int:
    out = _check_writable(args.out)
    try:
        result = experiments.run_tie_study(args.nu, args.n_list, args.mode)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    header = ("N", "nu", "k_less", "k_greater", "W_less", "W_greater", "T", "T_less", "T_greater",
              "stirling", "identity_gap", "mode")
    rows = []
    print(f"{'N':>8}  {'W_less':>24}  {'W_greater':>24}  {'T_less':>24}  {'T_greater':>24}  {'stirling':>10}")
    for r in result.rows:
        t = r.tie
        rows.append((r.n, result.nu, t.k_less, t.k_greater, t.w_less, t.w_greater, t.t_shared,
                     t.t_less, t.t_greater, r.stirling, t.identity_gap, args.mode))
        print(f"{r.n:>8}  {float(t.w_less):>24.17g}  {float(t.w_greater):>24.17g}  "
              f"{float(t.t_less):>24.17g}  {float(t.t_greater):>24.17g}  {r.stirling:>10.4g}")
    _write(out, to_csv(header, rows))
    bad = result.tie_identity_failures()
    for n in bad:
        print(f"invariant failed: tie identity at N={n}")
    print(f"tie table written to {out}")
    return EXIT_OK if not bad else EXIT_FAIL


def cmd_lln(args) -> int:
    out = _check_writable(args.out)
    mode = _resolve_mode(args.p1, args.mode)
    try:
        rows = experiments.run_lln_study(args.p1[1], args.eps_list, args.n_list, mode)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    p1 = args.p1[1] if mode == "exact" else float(args.p1[1])
    _write(out, to_csv(("epsilon", "N", "p1", "S_N", "mode"),
                       [(r.epsilon, r.n, p1, r.tail, mode) for r in rows]))
    for r in rows:
        print(f"eps={fmt(r.epsilon):>8}  N={r.n:>8}  S_N={float(r.tail):.6e}")
    for eps, trend in experiments.lln_trend(rows).items():
        print(f"eps={fmt(eps)}: {trend} in N")
    print(f"tail sums written to {out}")
    return EXIT_OK


COMMANDS = {"verify": cmd_verify, "sweep": cmd_sweep, "tie": cmd_tie, "lln": cmd_lln}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except (UsageError, linalg.DimensionLimitError) as exc:
        print(f"everett: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
