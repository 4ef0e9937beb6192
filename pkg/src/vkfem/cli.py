"""Command-line driver for the three benchmark experiments.

Writes one CSV row per level per method with the columns

    method, level, ndof, error_u, error_v, error_h_norm,
    error_method_norm, estimator, oscillation, rate

(floats as ``%.12e``) and prints a per-method rate summary.  Exit codes:
0 success, 1 nonlinear solver failure (the partial CSV is kept), 2 invalid
input.
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass
from typing import Optional

from .adaptivity import (AdaptiveConfig, _record, _solve, adaptive_levels,
                         estimate, uniform_levels)
from .analysis import fit_rate
from .assembly import PenaltyConfig
from .femspace import METHODS
from .problems import lshape_problem, square_problem
from .solver import SolverError

__all__ = ["ExperimentSpec", "run_experiment", "main", "CSV_COLUMNS"]

CSV_COLUMNS = ("method", "level", "ndof", "error_u", "error_v",
               "error_h_norm", "error_method_norm", "estimator",
               "oscillation", "rate")

EXAMPLES = ("square_analytic", "lshape_uniform", "lshape_adaptive")


@dataclass
class ExperimentSpec:
    """Everything one experiment run needs."""
    example: str
    method: str = "all"
    levels: int = 5
    theta: float = 0.5
    sigma_ip: float = 20.0
    sigma_dg: float = 20.0
    refine: Optional[str] = None
    estimator: Optional[str] = None
    out: str = "convergence.csv"
    quad_degree: int = 8
    newton_tol: float = 1e-10
    seed: Optional[int] = None
    emit_plot: bool = False

    def __post_init__(self):
        if self.example not in EXAMPLES:
            raise ValueError(f"unknown example {self.example!r}")
        if self.method not in METHODS + ("all",):
            raise ValueError(f"unknown method {self.method!r}")
        if self.levels < 1:
            raise ValueError("levels must be at least 1")
        if not 0.0 < self.theta <= 1.0:
            raise ValueError("theta must be in (0, 1]")
        if self.estimator is not None and self.estimator not in METHODS:
            raise ValueError(f"unknown estimator {self.estimator!r}")


def _methods_of(spec):
    return list(METHODS) if spec.method == "all" else [spec.method]


def _config(spec):
    return AdaptiveConfig(theta=spec.theta, max_levels=spec.levels,
                          penalty=PenaltyConfig(spec.sigma_ip, spec.sigma_dg),
                          newton_tol=spec.newton_tol,
                          quad_degree=spec.quad_degree)


def _row(method, record):
    return {
        "method": method,
        "level": record.level,
        "ndof": record.ndof,
        "error_u": record.error_u,
        "error_v": record.error_v,
        "error_h_norm": record.error_total,
        "error_method_norm": record.error_method,
        "estimator": record.estimator_total,
        "oscillation": record.oscillation,
        "rate": record.rate_vs_ndof,
    }


def _run_uniform(spec, problem, rows):
    for method in _methods_of(spec):
        for state in uniform_levels(problem, method, spec.levels,
                                    _config(spec)):
            rows.append(_row(method, state.record))


def _run_adaptive(spec, problem, rows):
    config = _config(spec)
    methods = _methods_of(spec)
    driver = spec.estimator or (methods[0] if len(methods) == 1 else "morley")
    prev = {m: None for m in methods}
    for state in adaptive_levels(problem, driver, config):
        for method in methods:
            if method == driver:
                record = state.record
            else:
                psi, report = _solve(state.mesh, method, problem, config)
                if not report.converged:
                    raise SolverError(
                        f"Newton did not converge at adaptive level "
                        f"{state.level} ({method})")
                eta = estimate(psi, (problem.exact.f, problem.exact.g),
                               config.quad_degree)
                record = _record(state.level, psi, problem, eta.total,
                                 config, prev[method])
            prev[method] = record
            rows.append(_row(method, record))


def _write_csv(path, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            out = []
            for col in CSV_COLUMNS:
                val = row[col]
                if isinstance(val, float):
                    out.append(f"{val:.12e}")
                else:
                    out.append(str(val))
            writer.writerow(out)


def _emit_plot(csv_path):
    script = csv_path + ".gp"
    lines = [
        "# gnuplot script: unified-norm error against degrees of freedom",
        "set datafile separator ','",
        "set logscale xy",
        "set xlabel 'ndof'",
        "set ylabel 'error (unified norm)'",
        "set key bottom left",
        "plot \\",
    ]
    parts = []
    for method in METHODS:
        parts.append(
            f"  '{csv_path}' using (strcol(1) eq '{method}' ? $3 : NaN):6 "
            f"with linespoints title '{method}'")
    lines.append(", \\\n".join(parts))
    with open(script, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    return script


def run_experiment(spec):
    """Run one experiment spec; returns the rows written to the CSV."""
    if spec.example == "square_analytic":
        problem = square_problem()
    else:
        problem = lshape_problem()
    adaptive = (spec.example == "lshape_adaptive"
                or spec.refine == "adaptive")
    if spec.refine == "uniform":
        adaptive = False
    rows = []
    try:
        if adaptive:
            _run_adaptive(spec, problem, rows)
        else:
            _run_uniform(spec, problem, rows)
    finally:
        # keep whatever levels completed, also on solver failure
        _write_csv(spec.out, rows)
        if spec.emit_plot:
            _emit_plot(spec.out)
    for method in _methods_of(spec):
        ours = [r for r in rows if r["method"] == method]
        if len(ours) >= 3:
            rate = fit_rate([r["ndof"] for r in ours],
                            [r["error_h_norm"] for r in ours], window=3)
            print(f"{spec.example} {method}: {len(ours)} levels, "
                  f"final ndof {ours[-1]['ndof']}, rate {rate:.3f}")
        elif ours:
            print(f"{spec.example} {method}: {len(ours)} levels, "
                  f"final ndof {ours[-1]['ndof']}")
    print(f"wrote {spec.out}")
    return rows


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="vkfem",
        description="Convergence experiments for quadratic clamped-plate "
                    "discretisations (Morley, C0 interior penalty, "
                    "discontinuous Galerkin).")
    parser.add_argument("--example", required=True, choices=EXAMPLES)
    parser.add_argument("--method", default="all",
                        choices=METHODS + ("all",))
    parser.add_argument("--levels", type=int, default=5)
    parser.add_argument("--theta", type=float, default=0.5,
                        help="bulk marking parameter in (0, 1]")
    parser.add_argument("--sigma-ip", type=float, default=20.0)
    parser.add_argument("--sigma-dg", type=float, default=20.0)
    parser.add_argument("--refine", choices=("uniform", "adaptive"),
                        default=None,
                        help="override the example's refinement style")
    parser.add_argument("--estimator", choices=METHODS, default=None,
                        help="estimator driving adaptive refinement")
    parser.add_argument("--out", default="convergence.csv")
    parser.add_argument("--quad-degree", type=int, default=8)
    parser.add_argument("--newton-tol", type=float, default=1e-10)
    parser.add_argument("--seed", type=int, default=None,
                        help="seed for property-test fixtures only")
    parser.add_argument("--emit-plot", action="store_true",
                        help="write a gnuplot script next to the CSV")
    return parser


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        spec = ExperimentSpec(
            example=args.example, method=args.method, levels=args.levels,
            theta=args.theta, sigma_ip=args.sigma_ip, sigma_dg=args.sigma_dg,
            refine=args.refine, estimator=args.estimator, out=args.out,
            quad_degree=args.quad_degree, newton_tol=args.newton_tol,
            seed=args.seed, emit_plot=args.emit_plot)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        run_experiment(spec)
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
