"""Command-line entry point: ``mhsspoly {solve,bench,coeffs,diagnose}``."""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

import numpy as np

from .harness.mmio import MatrixMarketError
from .harness.runner import EXIT_CODES, SOLVERS, BenchmarkSpec, load_problem, run_benchmark
from .harness.problems import SYNTHETIC_KINDS
from .innersolve import InnerSolveFailure
from .krylov import DEFAULT_MAXIT, DEFAULT_TOL, PivotBreakdown, Status
from .orthopoly import DEFAULT_DELTA, make_coeffs
from .precond import PRECONDITIONERS

log = logging.getLogger("mhsspoly")

EXIT_USAGE = 1


def _add_problem_args(p):
    g = p.add_argument_group("problem")
    g.add_argument("--matrix-b", metavar="FILE", help="Matrix Market file for the real part B")
    g.add_argument("--matrix-c", metavar="FILE", help="Matrix Market file for the imaginary part C")
    g.add_argument("--synthetic", choices=SYNTHETIC_KINDS,
                   help="use a generated problem instead of files")
    g.add_argument("--size", type=int, default=4096, help="synthetic problem size (default 4096)")
    g.add_argument("--epsilon", type=float, default=0.01,
                   help="lower spectrum end for diag_spectrum (default 0.01)")
    g.add_argument("--rhs", choices=("ones", "file"), default="ones")
    g.add_argument("--rhs-file", metavar="FILE", help="right-hand side, one 're [im]' per line")
    g.add_argument("--seed", type=int, default=0)


def _add_solver_args(p, multi=False):
    g = p.add_argument_group("solver")
    if multi:
        g.add_argument("--solver", nargs="+", choices=SOLVERS[:2], default=["cocg", "cocr"])
        g.add_argument("--precond", nargs="+", choices=PRECONDITIONERS,
                       default=["mhss-exact", "mhss-jacobi", "mhss-cheb"])
        g.add_argument("--degree", nargs="+", type=int, default=[10, 50, 100])
    else:
        g.add_argument("--solver", choices=SOLVERS, default="cocg")
        g.add_argument("--precond", choices=PRECONDITIONERS, default="mhss-jacobi")
        g.add_argument("--degree", type=int, default=50, help="polynomial degree m (default 50)")
    g.add_argument("--delta", type=float, default=DEFAULT_DELTA,
                   help="Chebyshev band half-width (default 0.2)")
    g.add_argument("--tol", type=float, default=DEFAULT_TOL)
    g.add_argument("--maxit", type=int, default=DEFAULT_MAXIT)
    g.add_argument("--inner-tol", type=float, default=1e-2,
                   help="relative tolerance of inner PCG for mhss-ilu0-pcg (default 1e-2)")
    g.add_argument("--threads", type=int, default=1)
    g.add_argument("--no-scale", action="store_true", help="skip diagonal equilibration")


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with 1; 2 is reserved for non-convergence."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS,
                        help="log progress to stderr")
    parser = _Parser(
        prog="mhsspoly", parents=[common],
        description="COCG/COCR with MHSS preconditioners for (B + iC) x = b.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", parents=[common],
                       help="solve one system and write report/residual artifacts")
    _add_problem_args(p)
    _add_solver_args(p)
    p.add_argument("--out", metavar="DIR", help="directory for report.json, residuals.csv/.svg")
    p.add_argument("--no-plot", action="store_true")

    p = sub.add_parser("bench", parents=[common],
                       help="iteration table over solvers x preconditioners x degrees")
    _add_problem_args(p)
    _add_solver_args(p, multi=True)
    p.add_argument("--out", metavar="DIR", help="directory for bench.csv and bench.svg")

    p = sub.add_parser("coeffs", parents=[common],
                       help="print primed recurrence coefficients as CSV")
    p.add_argument("--family", choices=("jacobi", "chebyshev"), default="jacobi")
    p.add_argument("--degree", type=int, default=10)
    p.add_argument("--delta", type=float, default=DEFAULT_DELTA)
    p.add_argument("--out", metavar="FILE")

    p = sub.add_parser("diagnose", parents=[common],
                       help="bounds and cost model for the MHSS splitting")
    p.add_argument("--max-steps", type=int, default=7, help="rows of the kappa/cost table")
    p.add_argument("--random", type=int, default=0, metavar="K",
                   help="also estimate the spectral radius on K random dense pairs")
    p.add_argument("--size", type=int, default=30, help="size of the random pairs")
    p.add_argument("--seed", type=int, default=0)
    return parser


def _spec_from_args(args, **over) -> BenchmarkSpec:
    kw = dict(
        matrix_b=args.matrix_b, matrix_c=args.matrix_c, synthetic=args.synthetic,
        size=args.size, epsilon=args.epsilon, delta=args.delta, tol=args.tol,
        maxit=args.maxit, rhs=args.rhs, rhs_file=args.rhs_file, seed=args.seed,
        threads=args.threads, scale=not args.no_scale, inner_tol=args.inner_tol,
    )
    if not isinstance(args.solver, list):
        kw.update(solver=args.solver, precond=args.precond, degree=args.degree)
    kw.update(over)
    return BenchmarkSpec(**kw)


def _cmd_solve(args) -> int:
    spec = _spec_from_args(args)
    res = run_benchmark(spec, args.out, plot=not args.no_plot)
    rep = res.report
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["solver", "precond", "degree", "n", "status", "iterations",
                "relative_residual", "true_relative_residual", "wall_time"])
    w.writerow([spec.solver, spec.precond, spec.degree, res.solution.size, rep.status.value,
                rep.iterations, f"{rep.relative_residual:.6e}",
                f"{res.true_relative_residual:.6e}", f"{rep.wall_time:.4f}"])
    if rep.message:
        log.warning(rep.message)
    for name, path in res.artifacts.items():
        log.info("wrote %s: %s", name, path)
    return res.exit_code


def _cmd_bench(args) -> int:
    base = _spec_from_args(args, solver="cocg", precond="none")
    system = load_problem(base)
    rows, curves = [], {}
    worst = 0
    for solver in args.solver:
        for kind in args.precond:
            degrees = args.degree if kind in ("mhss-cheb", "mhss-jacobi") else [0]
            for m in degrees:
                spec = _spec_from_args(args, solver=solver, precond=kind, degree=m)
                res = run_benchmark(spec, system=system)
                rep = res.report
                rows.append([solver, kind, m, rep.status.value, rep.iterations,
                             f"{rep.relative_residual:.6e}", f"{res.true_relative_residual:.6e}",
                             f"{rep.wall_time:.4f}"])
                label = f"{solver.upper()} {kind}" + (f" m={m}" if m else "")
                curves[label] = np.asarray(rep.residual_history) / (rep.rhs_norm or 1.0)
                worst = max(worst, res.exit_code)
    header = ["solver", "precond", "degree", "status", "iterations", "relative_residual",
              "true_relative_residual", "wall_time"]
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    if args.out:
        from .harness.plotting import plot_residuals

        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "bench.csv", "w", newline="") as fh:
            cw = csv.writer(fh, lineterminator="\n")
            cw.writerow(header)
            cw.writerows(rows)
        plot_residuals(curves, out / "bench.svg", f"n = {system.n}", args.tol)
        log.info("wrote %s and %s", out / "bench.csv", out / "bench.svg")
    return worst


def _cmd_coeffs(args) -> int:
    coeffs = make_coeffs(args.family, args.degree, args.delta)
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["n", "a_prime", "b_prime", "c_prime"])
        for n, a, b, c in coeffs.table():
            w.writerow([n, repr(a), repr(b), repr(c)])
    finally:
        if args.out:
            fh.close()
    if coeffs.epsilon is not None:
        log.info("epsilon = %r, delta = %r", coeffs.epsilon, coeffs.delta)
    return 0


def _cmd_diagnose(args) -> int:
    from .mhss import SQRT2_OVER_2, cost_model_C, kappa_bound, spectral_radius_PQ, upper_bound_U

    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["steps", "kappa_bound", "cost_threshold"])
    for n in range(1, args.max_steps + 1):
        w.writerow([n, f"{kappa_bound(n):.6g}", f"{cost_model_C(n):.4f}"])
    print()
    w.writerow(["alpha", "beta", "U"])
    for a, b in ((1, 1), (0.5, 1), (1, 0.5), (2, 1), (1, 2)):
        w.writerow([a, b, f"{upper_bound_U(a, b):.6f}"])
    if args.random:
        print()
        rng = np.random.default_rng(args.seed)
        w.writerow(["instance", "spectral_radius", "below_bound"])
        for k in range(args.random):
            n = args.size
            X = rng.standard_normal((n, max(1, n // 2)))
            Y = rng.standard_normal((n, n))
            rho = spectral_radius_PQ(X @ X.T, Y @ Y.T, seed=args.seed + k)
            w.writerow([k, f"{rho:.10f}", rho <= SQRT2_OVER_2 + 1e-8])
    return 0


COMMANDS = {"solve": _cmd_solve, "bench": _cmd_bench, "coeffs": _cmd_coeffs,
            "diagnose": _cmd_diagnose}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        return COMMANDS[args.command](args)
    except (FileNotFoundError, MatrixMarketError, OSError, ValueError) as exc:
        log.error("%s", exc)
        return EXIT_USAGE
    except (PivotBreakdown, InnerSolveFailure, np.linalg.LinAlgError) as exc:
        log.error("%s", exc)
        return EXIT_CODES[Status.BREAKDOWN]


if __name__ == "__main__":
    sys.exit(main())
