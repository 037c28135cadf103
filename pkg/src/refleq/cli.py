"""Command-line front end: every capability with reproducible file outputs.

Exit codes: 0 success, 1 argument/validation failure, 2 numerical failure
(resonance, no convergence, ...) with a machine-readable JSON object on
stderr.  All computations are deterministic; identical invocations produce
byte-identical outputs.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import catalog, cone, kernel, linsolve, monotone, reduce
from .errors import RefleqError
from .kernel import Kernel, ProblemParams


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def _emit(text: str, out: str | None):
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad flags; the contract reserves 2 for
    # numerical failures, so remap validation problems to exit code 1
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def _build_parser() -> _Parser:
    p = _Parser(prog="refleq", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="cmd", required=True)

    k = sub.add_parser("kernel", help="dump a kernel surface as CSV t,s,value")
    k.add_argument("--m", type=float, required=True)
    k.add_argument("--T", type=float, required=True)
    k.add_argument("--grid", type=int, default=101)
    k.add_argument("--which", choices=["G", "Gbar"], default="Gbar")
    k.add_argument("--out", default=None)

    s = sub.add_parser("sign", help="sign classification of the reflection kernel")
    s.add_argument("--m", type=float, required=True)
    s.add_argument("--T", type=float, required=True)
    s.add_argument("--grid", type=int, default=201)
    s.add_argument("--out", default=None)

    r = sub.add_parser("resonance", help="eigenvalue / resonance verdict")
    r.add_argument("--m", type=float, required=True)
    r.add_argument("--T", type=float, required=True)
    r.add_argument("--out", default=None)

    so = sub.add_parser("solve", help="solve the linear problem; CSV solution + residual JSON")
    so.add_argument("--m", type=float, required=True)
    so.add_argument("--T", type=float, required=True)
    so.add_argument("--h", required=True, help="forcing id (const:<v>, zero, cos, sin, cos_minus_sin)")
    so.add_argument("--lambda", dest="lam", type=float, default=0.0, help="boundary jump x(-T)-x(T)")
    so.add_argument("--n", type=int, default=1000, help="output grid subintervals (even)")
    so.add_argument("--n-quad", type=int, default=2000)
    so.add_argument("--out", default=None, help="solution CSV path (stdout if omitted)")
    so.add_argument("--residual-out", default=None, help="residual JSON path (stdout if omitted)")

    c = sub.add_parser("compare", help="pointwise ordering of two coefficients")
    c.add_argument("--m1", type=float, required=True)
    c.add_argument("--m2", type=float, required=True)
    c.add_argument("--T", type=float, required=True)
    c.add_argument("--h", default="const:1")
    c.add_argument("--n", type=int, default=200)
    c.add_argument("--grid", type=int, default=201)
    c.add_argument("--out", default=None)

    rd = sub.add_parser("reduce", help="integrate a reduced system and filter the result")
    rd.add_argument("--example", choices=["e-ex", "sinh"], required=True)
    rd.add_argument("--mode", choices=["periodic", "ivp"], default="periodic")
    rd.add_argument("--T", type=float, default=1.0)
    rd.add_argument("--x0", type=float, default=0.5, help="initial value (ivp mode)")
    rd.add_argument("--guess", type=float, nargs=2, default=(0.0, 0.0), metavar=("A", "B"))
    rd.add_argument("--steps", type=int, default=2000)
    rd.add_argument("--tol", type=float, default=1e-8, help="filter tolerance")
    rd.add_argument("--out", default=None, help="trajectory CSV path (stdout if omitted)")
    rd.add_argument("--verdict-out", default=None, help="filter verdict JSON path")

    it = sub.add_parser("iterate", help="monotone lower/upper iteration")
    it.add_argument("--example", choices=["exa3"], required=True)
    it.add_argument("--lambda", dest="lam", type=float, default=0.1)
    it.add_argument("--m", type=float, default=math.pi / 4)
    it.add_argument("--T", type=float, default=1.0)
    it.add_argument("--n", type=int, default=256)
    it.add_argument("--tol", type=float, default=1e-8)
    it.add_argument("--max-iters", type=int, default=60)
    it.add_argument("--out", default=None)

    ex = sub.add_parser("exists", help="cone existence hypothesis checks")
    ex.add_argument("--example", choices=["exa2"], required=True)
    ex.add_argument("--m", type=float, default=0.5)
    ex.add_argument("--T", type=float, default=1.0)
    ex.add_argument("--r", type=float, default=None)
    ex.add_argument("--R", type=float, default=None)
    ex.add_argument("--cone", choices=["positive", "negative"], default="positive")
    ex.add_argument("--sweep", action="store_true", help="scan a log-spaced (r, R) lattice")
    ex.add_argument("--branch", type=int, choices=[1, 2], default=None)
    ex.add_argument("--density", type=int, default=21)
    ex.add_argument("--out", default=None)
    return p


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _cmd_kernel(args) -> int:
    kern = Kernel(ProblemParams(args.m, args.T))
    kern.require_nonresonant()
    u = np.linspace(-args.T, args.T, args.grid)
    tt, ss = np.meshgrid(u, u, indexing="ij")
    vals = kern.g(tt, ss) if args.which == "G" else kern.gbar(tt, ss)
    rows = [[_fmt(t), _fmt(s), _fmt(v)] for t, s, v in zip(tt.ravel(), ss.ravel(), vals.ravel())]
    _emit(_csv_text(["t", "s", "value"], rows), args.out)
    return 0


def _cmd_sign(args) -> int:
    report = kernel.classify_sign(ProblemParams(args.m, args.T), grid_n=args.grid)
    _emit(_json(report.to_dict()), args.out)
    return 0


def _cmd_resonance(args) -> int:
    res = kernel.check_resonance(ProblemParams(args.m, args.T))
    _emit(_json({"resonant": res.resonant, "k": res.k, "alpha": args.m * args.T}), args.out)
    return 0


def _cmd_solve(args) -> int:
    if args.n % 2:
        raise SystemExit(1)
    problem = linsolve.ReflectionProblem(ProblemParams(args.m, args.T), catalog.forcing(args.h), lam=args.lam)
    u = linsolve.solve_grid(problem, n=args.n, n_quad=args.n_quad)
    _emit(u.to_csv(), args.out)
    _emit(_json({"sup_residual": linsolve.residual(problem, u)}), args.residual_out)
    return 0


def _cmd_compare(args) -> int:
    h = catalog.forcing(args.h)
    T = args.T
    u1 = linsolve.solve_grid(linsolve.ReflectionProblem(ProblemParams(args.m1, T), h), n=args.n)
    u2 = linsolve.solve_grid(linsolve.ReflectionProblem(ProblemParams(args.m2, T), h), n=args.n)
    g = np.linspace(-T, T, args.grid)
    tt, ss = np.meshgrid(g, g, indexing="ij")
    gap_kernel = Kernel(ProblemParams(args.m1, T)).gbar(tt, ss) - Kernel(ProblemParams(args.m2, T)).gbar(tt, ss)
    gap_solution = u1.values - u2.values
    _emit(
        _json(
            {
                "solution_gap_min": float(np.min(gap_solution)),
                "solution_gap_max": float(np.max(gap_solution)),
                "kernel_gap_min": float(np.min(gap_kernel)),
                "ordering_holds": bool(np.all(gap_solution > 0) and np.all(gap_kernel > 0)),
            }
        ),
        args.out,
    )
    return 0


def _cmd_reduce(args) -> int:
    if args.example == "sinh":
        fx = reduce.sinh_fixture()
        second = reduce.reduce_second_order(**fx)
        problem = reduce.NonlinearProblem(
            f=lambda t, y, x: math.sinh(y), T=args.T, mode=reduce.BoundaryMode.INITIAL_VALUE, x0=args.x0
        )
        sol = reduce.integrate_ivp(problem, n_steps=args.steps)
        verdict = reduce.filter_reflection_solution(sol, tol=args.tol, periodic=False)
        verdict_extra = {"second_order_initial_state": list(second.initial_state(args.x0))}
    else:  # e-ex
        mode = reduce.BoundaryMode.PERIODIC if args.mode == "periodic" else reduce.BoundaryMode.INITIAL_VALUE
        problem = reduce.NonlinearProblem(f=catalog.product_nonlinearity, T=args.T, mode=mode, x0=args.x0)
        if mode is reduce.BoundaryMode.PERIODIC:
            sol = reduce.shoot_periodic(problem, guess=tuple(args.guess), n_steps=args.steps)
        else:
            sol = reduce.integrate_ivp(problem, n_steps=args.steps)
        verdict = reduce.filter_reflection_solution(sol, tol=args.tol, periodic=mode is reduce.BoundaryMode.PERIODIC)
        verdict_extra = {}
    _emit(_csv_text(*_split_rows(sol.to_csv_rows())), args.out)
    _emit(_json({**verdict.to_dict(), **verdict_extra}), args.verdict_out)
    return 0


def _split_rows(rows):
    rows = list(rows)
    return rows[0], rows[1:]


def _cmd_iterate(args) -> int:
    T = args.T
    f = catalog.hyperbolic_lag(args.lam)
    lower = linsolve.GridFunction.from_callable(lambda t: T, T, args.n)
    upper = linsolve.GridFunction.from_callable(lambda t: -T, T, args.n)
    bracket = monotone.LowerUpperPair(lower, upper, monotone.BracketOrdering.LOWER_ABOVE_UPPER)
    report = monotone.iterate(f, bracket, m=args.m, max_iters=args.max_iters, tol=args.tol)
    _emit(_json(report.to_dict()), args.out)
    return 0


def _cmd_exists(args) -> int:
    f = catalog.NONLINEARITIES[args.example]
    params = ProblemParams(args.m if args.cone == "positive" else -abs(args.m), args.T)
    if args.sweep:
        variant = "positive" if args.cone == "positive" else "cor2"
        pair, report = cone.sweep_annulus(f, params, variant=variant, branch=args.branch, sample_density=args.density)
        payload = {"admissible_pair": list(pair) if pair else None, "report": report.to_dict() if report else None}
        _emit(_json(payload), args.out)
        return 0
    if args.r is not None and args.R is not None:
        bounds = cone.ConeBounds.from_kernel(params, args.r, args.R)
        if args.cone == "positive":
            report = cone.check_positive_existence(f, bounds, sample_density=args.density)
        else:
            report = cone.check_negative_existence(f, bounds, sample_density=args.density, variant="cor2")
    else:
        report = cone.check_asymptotic_corollary(f, args.m, args.T, cone=args.cone)
    _emit(_json(report.to_dict()), args.out)
    return 0


_HANDLERS = {
    "kernel": _cmd_kernel,
    "sign": _cmd_sign,
    "resonance": _cmd_resonance,
    "solve": _cmd_solve,
    "compare": _cmd_compare,
    "reduce": _cmd_reduce,
    "iterate": _cmd_iterate,
    "exists": _cmd_exists,
}


def run(argv) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _HANDLERS[args.cmd](args)
    except (ValueError, KeyError) as exc:
        sys.stderr.write(_json({"error": type(exc).__name__, "message": str(exc)}))
        return 1
    except RefleqError as exc:
        sys.stderr.write(_json({"error": type(exc).__name__, "message": str(exc)}))
        return 2


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
