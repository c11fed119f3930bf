"""Command-line front end.

Subcommands: ``analyze``, ``solve``, ``probe``, ``sweep``, ``check-lemmas``.

Exit codes:
    0  success
    1  usage, I/O or invalid input
    2  A^t J A is not positive definite
    3  a vanishing term (zero solution, zero normalizer in the diagnostics)
    4  a directed probe left the positive definite region
    5  check-lemmas found a violation
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from typing import List, Optional

import numpy as np

from . import __version__
from .conditioning import bound_coefficients
from .diagnostics import DEFAULT_TAU, theorem_diagnostics
from .ensembles import run_all
from .errors import (IlsError, NotPositiveDefinite, PerturbationLeftDomain,
                     VanishingTerm, ZeroSolution)
from .examples import get_example
from .probe import MODES, ProbeConfig, format_float, run_probe
from .problem import (IlsProblem, optimality_residual, problem_from_dict,
                      problem_to_dict, solve)

EXIT_USAGE = 1
EXIT_NOT_SPD = 2
EXIT_VANISHING = 3
EXIT_LEFT_DOMAIN = 4
EXIT_CHECK_FAILED = 5

SWEEP_COLUMNS = ["alpha", "chi_A", "chi_b", "chi_Ab", "B", "bound_iii", "bound_iv",
                 "rho", "lambda1", "lambda2", "overestimation_floor"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # exit code 2 is reserved for NotPositiveDefinite
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def fmt6(v) -> str:
    if v is None:
        return "n/a"
    return f"{v:.6g}"


def _jsonable(obj):
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.generic):
        return _jsonable(obj.item())
    return obj


def dump_json(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, allow_nan=False) + "\n"


def default_seed() -> int:
    raw = os.environ.get("ILSCOND_SEED")
    if raw is None or raw == "":
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"ILSCOND_SEED must be an integer, got {raw!r}") from None


# -- problem sources ----------------------------------------------------------

def _add_source(p: argparse.ArgumentParser):
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--input", "-i", metavar="PATH", help="problem JSON file")
    g.add_argument("--example", type=int, choices=(1, 2), help="built-in example family")
    p.add_argument("--alpha", type=float, default=0.01,
                   help="example parameter (default 0.01)")


def load_problem(args) -> IlsProblem:
    if args.example is not None:
        return get_example(args.example, args.alpha)[0]
    try:
        with open(args.input) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read problem file {args.input}: {exc}") from None
    try:
        return problem_from_dict(data)
    except NotPositiveDefinite:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"invalid problem file {args.input}: {exc}") from None


def _emit(text: str, path: Optional[str]):
    if path is None:
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc}") from None


# -- analyze -----------------------------------------------------------------

def _analysis(p: IlsProblem, tau: float):
    report = bound_coefficients(p)
    diag, note = None, None
    if p.norm_b == 0.0:
        note = "norm_b = 0 (b held fixed): theorem diagnostics not applicable"
    else:
        diag = theorem_diagnostics(report, tau)
    return report, diag, note


def analysis_text(p: IlsProblem, report, diag, note) -> str:
    out = io.StringIO()
    w = out.write
    w(f"problem: m = {p.m}, n = {p.n}, m_plus = {p.J.m_plus}, m_minus = {p.J.m_minus}\n")
    w(f"normalizers: norm_a = {fmt6(p.norm_a)}, norm_b = {fmt6(p.norm_b)}\n")
    w("\nnorms:\n")
    for label, val in [("||A||_F", report.norm_A_fro), ("||b||_2", report.norm_b_2),
                       ("||x||_2", report.norm_x), ("||r||_2", report.norm_r),
                       ("||(A^tJA)^-1||_2", report.norm_gram_inv),
                       ("||(A^tJA)^-1 A^t||_2", report.norm_gram_inv_At),
                       ("||M1||_2", report.norm_M1), ("||M2||_2", report.norm_M2),
                       ("||M1-M2||_2", report.norm_JxA), ("||Jxb||_2", report.norm_Jxb)]:
        w(f"  {label} = {fmt6(val)}\n")
    w("\ncondition numbers:\n")
    w(f"  chi_A = {fmt6(report.chi_A)}\n")
    w(f"  chi_b = {fmt6(report.chi_b)}\n")
    w(f"  chi_Ab = {fmt6(report.chi_Ab)}\n")
    w(f"  B = {fmt6(report.B)}\n")
    w("\nbounds (coefficients of eps):\n")
    w(f"  (ii)  chi_Ab = {fmt6(report.bound_ii)}\n")
    w(f"  (iii) chi_A+chi_b = {fmt6(report.bound_iii)}\n")
    w(f"  (iv)  B+chi_b = {fmt6(report.bound_iv)}\n")
    w("\ntheorem diagnostics:\n")
    if diag is None:
        w(f"  {note}\n")
    else:
        w(f"  rho = {fmt6(diag.rho)}\n")
        w(f"  lambda1 = {fmt6(diag.lambda1)}\n")
        w(f"  lambda2 = {fmt6(diag.lambda2)}\n")
        star = {True: "holds", False: "fails"}
        w(f"  2rho = {2 * diag.rho:.2f} >=* lambda1 = {diag.lambda1:.2f} >= rho = "
          f"{diag.rho:.2f}  (* {star[diag.star_b_holds]})\n")
        w(f"  rho+1/2 = {diag.rho + 0.5:.2f} >=* lambda2 = {diag.lambda2:.2f} >= rho/2-1 = "
          f"{diag.lower2:.2f}  (* {star[diag.star_d_holds]})\n")
        w(f"  overestimation_floor = {fmt6(diag.overestimation_floor)}\n")
        w(f"  provisionally_forward_stable = {str(diag.provisionally_forward_stable).lower()}"
          f" (tau = {fmt6(diag.tau)})\n")
        w(f"  guaranteed_system_holds = {str(diag.guaranteed_hold).lower()}\n")
    return out.getvalue()


def cmd_analyze(args) -> int:
    p = load_problem(args)
    report, diag, note = _analysis(p, args.tau)
    if args.format == "json":
        text = dump_json({
            "problem": problem_to_dict(p),
            "report": report.as_dict(),
            "diagnostics": None if diag is None else diag.as_dict(),
            "note": note,
        })
    else:
        text = analysis_text(p, report, diag, note)
    _emit(text, args.output)
    return 0


# -- solve -------------------------------------------------------------------

def cmd_solve(args) -> int:
    p = load_problem(args)
    s = solve(p)
    res = optimality_residual(p, s)
    if args.format == "json":
        text = dump_json({"problem": problem_to_dict(p), "x": s.x.tolist(),
                          "r": s.r.tolist(), "optimality_residual": res})
    else:
        text = ("x = " + " ".join(format_float(v) for v in s.x) + "\n"
                + "r = " + " ".join(format_float(v) for v in s.r) + "\n"
                + f"||A^t J r||_2 = {res:.3e}\n")
    _emit(text, args.output)
    return 0


# -- probe -------------------------------------------------------------------

def probe_text(res) -> str:
    lines = [
        f"mode = {res.mode}",
        f"epsilon = {res.epsilon:g}",
        f"samples = {res.samples} (accepted {res.accepted}, rejected {res.rejected})",
        f"seed = {res.seed}",
        f"max_ratio = {fmt6(res.max_ratio)}",
        f"reference condition number = {fmt6(res.reference)}",
        f"attained_fraction = {res.attained_fraction:.9f}",
    ]
    for name in ("i", "ii", "iii", "iv"):
        lines.append(f"margin ({name}) = {fmt6(res.margins[name])}")
    lines.append(f"sound = {str(res.sound).lower()} (slack {fmt6(res.slack)} * eps)")
    if res.remainder_constant is not None:
        lines.append(f"remainder_constant = {fmt6(res.remainder_constant)}")
    return "\n".join(lines) + "\n"


def cmd_probe(args) -> int:
    p = load_problem(args)
    seed = default_seed() if args.seed is None else args.seed
    try:
        cfg = ProbeConfig(epsilon=args.eps, samples=args.samples, seed=seed,
                          mode=args.mode, workers=args.workers)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    res = run_probe(p, cfg)
    if args.csv:
        _emit(res.csv_text(), args.csv)
    if args.format == "json":
        text = dump_json(res.summary())
    else:
        text = probe_text(res)
    _emit(text, args.output)
    return 0


# -- sweep -------------------------------------------------------------------

def parse_alphas(args) -> List[float]:
    alphas: List[float] = []
    if args.alphas:
        try:
            alphas = [float(a) for a in args.alphas.split(",") if a.strip()]
        except ValueError:
            raise UsageError(f"cannot parse alpha list {args.alphas!r}") from None
    elif args.alpha_range:
        start, stop, count = args.alpha_range
        count = int(count)
        if count < 1 or start <= 0 or stop <= 0:
            raise UsageError("--alpha-range needs START > 0, STOP > 0, COUNT >= 1")
        alphas = np.geomspace(start, stop, count).tolist()
    if not alphas:
        raise UsageError("no alpha values given (use --alphas or --alpha-range)")
    return alphas


def sweep_rows(which: int, alphas: List[float], tau: float = DEFAULT_TAU):
    for a in alphas:
        p, _ = get_example(which, a)
        report, diag, _ = _analysis(p, tau)
        nan = math.nan
        yield [a, report.chi_A, report.chi_b, report.chi_Ab, report.B,
               report.bound_iii, report.bound_iv,
               diag.rho if diag else nan, diag.lambda1 if diag else nan,
               diag.lambda2 if diag else nan,
               diag.overestimation_floor if diag else nan]


def cmd_sweep(args) -> int:
    alphas = parse_alphas(args)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for row in sweep_rows(args.example, alphas, args.tau):
        w.writerow([format_float(v) for v in row])
    _emit(buf.getvalue(), args.output)
    return 0


# -- check-lemmas ------------------------------------------------------------

def cmd_check_lemmas(args) -> int:
    seed = default_seed() if args.seed is None else args.seed
    results = run_all(seed, args.count)
    for r in results:
        print(r.line())
        for f in r.failures[:5]:
            print(f"    {f}")
    return 0 if all(r.passed for r in results) else EXIT_CHECK_FAILED


# -- entry point -------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="ilscond", description=(
        "Conditioning and perturbation-bound analysis for indefinite least squares."))
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    a = sub.add_parser("analyze", help="condition numbers, bounds and theorem diagnostics")
    _add_source(a)
    a.add_argument("--format", choices=("text", "json"), default="text")
    a.add_argument("--tau", type=float, default=DEFAULT_TAU,
                   help="threshold for the provisional forward stability flag")
    a.add_argument("--output", "-o", metavar="PATH")
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser("solve", help="solve the ILS problem")
    _add_source(s)
    s.add_argument("--format", choices=("text", "json"), default="text")
    s.add_argument("--output", "-o", metavar="PATH")
    s.set_defaults(func=cmd_solve)

    pr = sub.add_parser("probe", help="perturbation experiments")
    _add_source(pr)
    pr.add_argument("--mode", choices=MODES, default="random-joint")
    pr.add_argument("--eps", type=float, default=1e-6)
    pr.add_argument("--samples", type=int, default=1000)
    pr.add_argument("--seed", type=int, default=None,
                    help="random seed (default: $ILSCOND_SEED or 0)")
    pr.add_argument("--workers", type=int, default=1,
                    help="threads for sampling; output does not depend on it")
    pr.add_argument("--csv", metavar="PATH", help="write per-sample CSV here")
    pr.add_argument("--format", choices=("text", "json"), default="text")
    pr.add_argument("--output", "-o", metavar="PATH")
    pr.set_defaults(func=cmd_probe)

    sw = sub.add_parser("sweep", help="CSV of all quantities over alpha for an example")
    sw.add_argument("--example", type=int, choices=(1, 2), required=True)
    g = sw.add_mutually_exclusive_group()
    g.add_argument("--alphas", help="comma-separated alpha values")
    g.add_argument("--alpha-range", nargs=3, type=float, metavar=("START", "STOP", "COUNT"),
                   help="geometric range")
    sw.add_argument("--tau", type=float, default=DEFAULT_TAU)
    sw.add_argument("--output", "-o", metavar="PATH")
    sw.set_defaults(func=cmd_sweep)

    c = sub.add_parser("check-lemmas", help="run the lemma and theorem property suites")
    c.add_argument("--seed", type=int, default=None)
    c.add_argument("--count", type=int, default=10_000)
    c.set_defaults(func=cmd_check_lemmas)
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"ilscond: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PerturbationLeftDomain as exc:
        print(f"ilscond: perturbation left the positive definite region: {exc}", file=sys.stderr)
        return EXIT_LEFT_DOMAIN
    except NotPositiveDefinite as exc:
        print(f"ilscond: A^t J A is not positive definite: {exc}", file=sys.stderr)
        return EXIT_NOT_SPD
    except (VanishingTerm, ZeroSolution) as exc:
        print(f"ilscond: {exc}", file=sys.stderr)
        return EXIT_VANISHING
    except IlsError as exc:
        print(f"ilscond: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
