"""Benchmark specification and the scale / precondition / solve / unscale pipeline."""

from __future__ import annotations

import csv
import json
import platform
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .. import __version__
from ..core import ComplexSymSystem, get_num_threads, set_num_threads
from ..innersolve import make_spd_solver
from ..krylov import DEFAULT_MAXIT, DEFAULT_TOL, SolveReport, Status, cocg, cocr
from ..mhss import mhss_solve
from ..orthopoly import DEFAULT_DELTA
from ..precond import PRECONDITIONERS, build_preconditioner
from ..scaling import apply_scaling, compute_scaling, unscale_solution
from .mmio import read_matrix_market
from .problems import pair_and_pad, synthetic_problem

__all__ = ["BenchmarkSpec", "BenchmarkResult", "run_benchmark", "load_problem",
           "write_residuals_csv", "EXIT_CODES", "SOLVERS"]

SOLVERS = ("cocg", "cocr", "mhss")

EXIT_CODES = {
    Status.CONVERGED: 0,
    Status.NOT_CONVERGED: 2,
    Status.BREAKDOWN: 3,
    Status.NUMERICAL_FAILURE: 3,
}


@dataclass
class BenchmarkSpec:
    """Everything needed to reproduce one solve.

    Give either ``matrix_b`` and ``matrix_c`` (Matrix Market paths) or
    ``synthetic`` (a kind from :mod:`.problems`) with ``size``.
    """

    matrix_b: Optional[str] = None
    matrix_c: Optional[str] = None
    synthetic: Optional[str] = None
    size: int = 1024
    epsilon: float = 0.01
    solver: str = "cocg"
    precond: str = "mhss-jacobi"
    degree: int = 50
    delta: float = DEFAULT_DELTA
    tol: float = DEFAULT_TOL
    maxit: int = DEFAULT_MAXIT
    rhs: str = "ones"
    rhs_file: Optional[str] = None
    seed: int = 0
    threads: int = 1
    scale: bool = True
    inner_tol: float = 1e-2

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.maxit < 1:
            raise ValueError("maxit must be >= 1")
        if self.solver not in SOLVERS:
            raise ValueError(f"unknown solver {self.solver!r}; choose from {SOLVERS}")
        if self.precond not in PRECONDITIONERS:
            raise ValueError(f"unknown preconditioner {self.precond!r}")
        if self.synthetic is None:
            if not (self.matrix_b and self.matrix_c):
                raise ValueError("need both matrix files or a synthetic problem")
            for p in (self.matrix_b, self.matrix_c):
                if not Path(p).is_file():
                    raise FileNotFoundError(p)
        if self.rhs not in ("ones", "file"):
            raise ValueError("rhs must be 'ones' or 'file'")
        if self.rhs == "file" and not (self.rhs_file and Path(self.rhs_file).is_file()):
            raise FileNotFoundError(self.rhs_file or "<missing rhs file>")


@dataclass
class BenchmarkResult:
    spec: BenchmarkSpec
    report: SolveReport
    solution: np.ndarray
    true_relative_residual: float
    precond_info: dict = field(default_factory=dict)
    artifacts: dict = field(default_factory=dict)

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.report.status]

    def as_dict(self) -> dict:
        return {
            "spec": asdict(self.spec),
            "report": self.report.as_dict(),
            "true_relative_residual": self.true_relative_residual,
            "preconditioner": self.precond_info,
            "n": int(self.solution.size),
            "versions": _versions(),
        }


def _versions() -> dict:
    import matplotlib
    import scipy

    return {"mhsspoly": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "matplotlib": matplotlib.__version__, "python": platform.python_version()}


def _read_rhs(path, n) -> np.ndarray:
    """One value per line: ``re`` or ``re im``."""
    vals = np.loadtxt(path, ndmin=2)
    if vals.shape[1] == 1:
        rhs = vals[:, 0].astype(np.complex128)
    elif vals.shape[1] == 2:
        rhs = vals[:, 0] + 1j * vals[:, 1]
    else:
        raise ValueError(f"{path}: expected 1 or 2 columns, got {vals.shape[1]}")
    if rhs.size != n:
        raise ValueError(f"{path}: right-hand side has {rhs.size} entries, system has {n}")
    return rhs


def load_problem(spec: BenchmarkSpec) -> ComplexSymSystem:
    if spec.synthetic is not None:
        system = synthetic_problem(spec.synthetic, spec.size, spec.seed, spec.epsilon)
    else:
        system = pair_and_pad(read_matrix_market(spec.matrix_b), read_matrix_market(spec.matrix_c))
    if spec.rhs == "file":
        system = system.with_rhs(_read_rhs(spec.rhs_file, system.n))
    return system


def run_benchmark(spec: BenchmarkSpec, out_dir=None, system: ComplexSymSystem | None = None,
                  plot: bool = True) -> BenchmarkResult:
    """Scale, build the preconditioner, solve, unscale; optionally write artifacts.

    With ``out_dir`` set, writes ``report.json``, ``residuals.csv`` and (when
    ``plot``) ``residuals.svg`` there.
    """
    previous = get_num_threads()
    set_num_threads(spec.threads)
    try:
        if system is None:
            system = load_problem(spec)
        if spec.scale:
            s = compute_scaling(system.B, system.C)
            work = apply_scaling(system, s)
        else:
            s = np.ones(system.n)
            work = system
        if spec.solver == "mhss":
            kinds = {"mhss-exact": "auto", "mhss-ilu0": "ic0-direct", "mhss-ilu0-pcg": "ic0-pcg"}
            if spec.precond not in kinds:
                raise ValueError("the MHSS iteration needs --precond mhss-exact, mhss-ilu0 "
                                 "or mhss-ilu0-pcg")
            kw = {"tol": spec.inner_tol} if spec.precond == "mhss-ilu0-pcg" else {}
            inner = make_spd_solver(work.M, kinds[spec.precond], **kw)
            w, report = mhss_solve(work, inner, spec.tol, spec.maxit)
            info = {"kind": spec.precond, "inner": inner.describe()}
        else:
            pre = build_preconditioner(work, spec.precond, spec.degree, spec.delta,
                                       inner_tol=spec.inner_tol)
            solve = cocg if spec.solver == "cocg" else cocr
            w, report = solve(work.matvec, work.rhs, pre, spec.tol, spec.maxit)
            info = {**pre.describe(), "setup_time": pre.setup_time}
        x = unscale_solution(w, s)
        bnorm = np.linalg.norm(system.rhs)
        true_rel = float(np.linalg.norm(system.rhs - system.matvec(x)) / bnorm) if bnorm else 0.0
        report.extra.update({"solver": spec.solver, "threads": spec.threads, "seed": spec.seed})
        result = BenchmarkResult(spec, report, x, true_rel, info)
    finally:
        set_num_threads(previous)
    if out_dir is not None:
        write_artifacts(result, out_dir, plot)
    return result


def write_residuals_csv(report: SolveReport, path) -> Path:
    path = Path(path)
    bnorm = report.rhs_norm
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["iteration", "residual_norm", "relative_residual"])
        for k, rn in enumerate(report.residual_history):
            w.writerow([k, repr(float(rn)), repr(float(rn / bnorm)) if bnorm else "0.0"])
    return path


def write_artifacts(result: BenchmarkResult, out_dir, plot: bool = True) -> dict:
    from .plotting import plot_residuals

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"report": out / "report.json", "residuals": out / "residuals.csv"}
    with open(paths["report"], "w") as fh:
        json.dump(result.as_dict(), fh, indent=2, default=_json_default)
        fh.write("\n")
    write_residuals_csv(result.report, paths["residuals"])
    if plot:
        spec = result.spec
        label = f"{spec.solver.upper()} {spec.precond}"
        if spec.precond in ("mhss-cheb", "mhss-jacobi"):
            label += f" m={spec.degree}"
        bnorm = result.report.rhs_norm or 1.0
        rel = np.asarray(result.report.residual_history) / bnorm
        paths["figure"] = plot_residuals({label: rel}, out / "residuals.svg", label, spec.tol)
    result.artifacts = {k: str(v) for k, v in paths.items()}
    return result.artifacts


def _json_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, Status):
        return obj.value
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")
