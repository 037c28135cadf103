"""Sampling-based verification of cone fixed-point existence hypotheses.

For x'(t) = f(t, x(-t), x(t)) with periodic conditions, positive (or
negative) solutions exist when f + m*x satisfies sign and growth
inequalities expressed through the extrema M = sup Gbar, L = inf Gbar over
an annulus [r, R] of norms.  Everything here is a certificate over a finite
sample lattice: "holds on N samples with minimum margin d", never a proof.
The value of the checks is falsification plus evidence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import BadWindow
from .kernel import ProblemParams, kernel_bounds
from .linsolve import GridFunction, PeriodicGreenSolver


@dataclass
class ConeBounds:
    """Kernel extrema (M, L) together with the annulus radii 0 < r < R."""

    M: float
    L: float
    m: float
    T: float
    r: float
    R: float

    def __post_init__(self):
        if not 0 < self.r < self.R:
            raise ValueError("need 0 < r < R")
        if self.m > 0 and not 0 < self.L <= self.M:
            raise ValueError("for m > 0 in the positivity window expect 0 < L <= M")
        if self.m < 0 and not self.L <= self.M < 0:
            raise ValueError("for m < 0 in the negativity window expect L <= M < 0")

    @classmethod
    def from_kernel(cls, params: ProblemParams, r: float, R: float, grid_n: int = 201, refine_iters: int = 2):
        M, L, _, _ = kernel_bounds(params, grid_n=grid_n, refine_iters=refine_iters)
        return cls(M=M, L=L, m=params.m, T=params.T, r=r, R=R)


@dataclass
class ExistenceReport:
    """Verdict of one hypothesis check plus the sampled evidence."""

    theorem: str
    branch: int | None
    verdict: str  # holds_on_samples | violated | condition_1 | condition_2 | inconclusive
    min_margin: float | None = None
    margins: dict = field(default_factory=dict)
    violation: tuple | None = None  # (t, x, y, inequality label)
    bounds: dict = field(default_factory=dict)
    samples: int = 0
    notes: list = field(default_factory=list)

    def to_dict(self):
        return {
            "theorem": self.theorem,
            "branch": self.branch,
            "verdict": self.verdict,
            "min_margin": self.min_margin,
            "margins": self.margins,
            "violation": None if self.violation is None else list(self.violation),
            "bounds": self.bounds,
            "samples": self.samples,
            "notes": list(self.notes),
        }


def _sample_inequality(f, m, T, xlo, xhi, relation, coeff, density, extra_points=()):
    """Min margin of `f(t,x,y) + m*x (rel) coeff*x` over a t-x-y lattice.

    relation '>=' gives margin lhs - rhs, '<=' gives rhs - lhs; admissible
    means margin >= 0 everywhere.  extra_points are (t, x, y) triples checked
    in addition to the lattice (used to re-check cached violations).
    """
    ts = np.linspace(-T, T, density)
    xs = np.linspace(xlo, xhi, density)
    ys = np.linspace(xlo, xhi, density)
    best = (math.inf, None)
    count = 0
    for t in ts:
        tt = float(t)
        xg, yg = np.meshgrid(xs, ys, indexing="ij")
        vals = np.array([[f(tt, float(x), float(y)) for y in ys] for x in xs]) if not _vectorizable(f, tt, xg, yg) else np.asarray(f(tt, xg, yg), float)
        lhs = vals + m * xg
        rhs = coeff * xg
        margin = lhs - rhs if relation == ">=" else rhs - lhs
        count += margin.size
        k = np.unravel_index(np.argmin(margin), margin.shape)
        if margin[k] < best[0]:
            best = (float(margin[k]), (tt, float(xg[k]), float(yg[k])))
    for (t, x, y) in extra_points:
        lhs = f(t, x, y) + m * x
        rhs = coeff * x
        margin = lhs - rhs if relation == ">=" else rhs - lhs
        count += 1
        if margin < best[0]:
            best = (float(margin), (float(t), float(x), float(y)))
    return best[0], best[1], count


def _vectorizable(f, t, xg, yg):
    try:
        out = np.asarray(f(t, xg, yg), float)
        return out.shape == xg.shape
    except (TypeError, ValueError):
        return False


def _constraint_systems(bounds: ConeBounds, variant: str):
    """Interval systems and growth coefficients for each theorem variant.

    Returns (window_check, base, branch1, branch2) where base and the
    branches are lists of (label, xlo, xhi, relation, coeff).
    """
    M, L, m, T, r, R = bounds.M, bounds.L, bounds.m, bounds.T, bounds.r, bounds.R
    if variant in ("positive", "cor1"):
        window_ok = 0 < m < math.pi / (4 * T)
        c_lo, c_hi = M / (2 * T * L**2), 1.0 / (2 * T * M)
        if variant == "positive":
            base = [("cone", L * r / M, M * R / L, ">=", 0.0)]
            b1 = [("small_x", L * r / M, r, ">=", c_lo), ("large_x", R, M * R / L, "<=", c_hi)]
            b2 = [("small_x", L * r / M, r, "<=", c_hi), ("large_x", R, M * R / L, ">=", c_lo)]
        else:  # cor1: negative annulus, m > 0
            base = [("cone", -M * R / L, -L * r / M, "<=", 0.0)]
            b1 = [("small_x", -r, -L * r / M, "<=", c_lo), ("large_x", -M * R / L, -R, ">=", c_hi)]
            b2 = [("small_x", -r, -L * r / M, ">=", c_hi), ("large_x", -M * R / L, -R, "<=", c_lo)]
        return window_ok, base, b1, b2
    if variant in ("teo2", "cor2"):
        window_ok = -math.pi / (4 * T) < m < 0
        c_lo, c_hi = L / (2 * T * M**2), 1.0 / (2 * T * L)
        if variant == "teo2":
            base = [("cone", M * r / L, L * R / M, "<=", 0.0)]
            b1 = [("small_x", M * r / L, r, "<=", c_lo), ("large_x", R, L * R / M, ">=", c_hi)]
            b2 = [("small_x", M * r / L, r, ">=", c_hi), ("large_x", R, L * R / M, "<=", c_lo)]
        else:  # cor2: negative annulus, m < 0
            base = [("cone", -L * R / M, -M * r / L, ">=", 0.0)]
            b1 = [("small_x", -r, -M * r / L, ">=", c_lo), ("large_x", -L * R / M, -R, "<=", c_hi)]
            b2 = [("small_x", -r, -M * r / L, "<=", c_hi), ("large_x", -L * R / M, -R, ">=", c_lo)]
        return window_ok, base, b1, b2
    raise ValueError(f"unknown variant {variant!r}")


_THEOREM_NAMES = {
    "positive": "positive_solution_theorem",
    "cor1": "negative_solution_corollary_m_positive",
    "teo2": "positive_solution_theorem_m_negative",
    "cor2": "negative_solution_corollary_m_negative",
}


def _check_variant(f, bounds: ConeBounds, variant: str, density: int, recheck_points=(), branches=(1, 2)):
    window_ok, base, b1, b2 = _constraint_systems(bounds, variant)
    if not window_ok:
        raise BadWindow(f"m={bounds.m} outside the window required by variant {variant!r}")
    report = ExistenceReport(
        theorem=_THEOREM_NAMES[variant],
        branch=None,
        verdict="violated",
        bounds={"M": bounds.M, "L": bounds.L, "r": bounds.r, "R": bounds.R, "m": bounds.m, "T": bounds.T},
        notes=["sampling certificate, not a proof"],
    )
    total = 0
    worst_base = math.inf
    for label, xlo, xhi, rel, coeff in base:
        mg, wit, n = _sample_inequality(f, bounds.m, bounds.T, xlo, xhi, rel, coeff, density, recheck_points)
        total += n
        report.margins[label] = mg
        if mg < worst_base:
            worst_base = mg
        if mg < 0:
            report.violation = (*wit, label)
    if report.violation is not None:
        report.samples = total
        report.min_margin = worst_base
        return report
    for branch_id, constraints in ((1, b1), (2, b2)):
        if branch_id not in branches:
            continue
        worst = worst_base
        wit_worst = None
        branch_margins = {}
        for label, xlo, xhi, rel, coeff in constraints:
            mg, wit, n = _sample_inequality(f, bounds.m, bounds.T, xlo, xhi, rel, coeff, density, recheck_points)
            total += n
            branch_margins[f"branch{branch_id}_{label}"] = mg
            if mg < worst:
                worst, wit_worst = mg, (*wit, f"branch{branch_id}_{label}")
        report.margins.update(branch_margins)
        if worst >= 0:
            report.branch = branch_id
            report.verdict = "holds_on_samples"
            report.min_margin = worst
            report.samples = total
            if worst == 0:
                report.notes.append("minimum margin is exactly zero (equality boundary)")
            return report
    report.verdict = "violated"
    report.min_margin = min(report.margins.values())
    # witness of the least-violated branch is the most informative
    report.violation = report.violation or _worst_witness(f, bounds, b1 + b2, density)
    report.samples = total
    return report


def _worst_witness(f, bounds, constraints, density):
    worst = (math.inf, None)
    for label, xlo, xhi, rel, coeff in constraints:
        mg, wit, _ = _sample_inequality(f, bounds.m, bounds.T, xlo, xhi, rel, coeff, density)
        if mg < worst[0]:
            worst = (mg, (*wit, label))
    return worst[1]


def check_positive_existence(f, bounds: ConeBounds, sample_density: int = 41, recheck_points=()) -> ExistenceReport:
    """Check the positive-solution hypotheses for m in (0, pi/(4T))."""
    return _check_variant(f, bounds, "positive", sample_density, recheck_points)


def check_negative_existence(
    f, bounds: ConeBounds, sample_density: int = 41, variant: str = "cor1", recheck_points=()
) -> ExistenceReport:
    """Check a negative-annulus or negative-m variant: 'cor1', 'teo2' or 'cor2'."""
    if variant not in ("cor1", "teo2", "cor2"):
        raise ValueError("variant must be 'cor1', 'teo2' or 'cor2'")
    return _check_variant(f, bounds, variant, sample_density, recheck_points)


def check_asymptotic_corollary(f, m: float, T: float, probe_points=None, n_t: int = 41, cone: str = "positive") -> ExistenceReport:
    """Classify the sub/superlinear limit pattern of f(t,x,y)/x along probes.

    Positive cone: probes x = y -> 0+ and -> +infinity; condition (1) means
    f/x -> +inf at 0 and -> 0 at infinity, condition (2) the reverse; either
    yields a positive solution for m in (0, pi/(4T)) and f >= 0 on the
    positive quadrant.  The negative cone mirrors everything through x -> -x
    and uses the negativity window for |m| (the check accepts m by magnitude).
    Uniformity in t is assessed by the maximum of |f/x| over a t-grid.
    """
    if cone not in ("positive", "negative"):
        raise ValueError("cone must be 'positive' or 'negative'")
    if not 0 < abs(m) < math.pi / (4 * T):
        raise BadWindow(f"|m|={abs(m)} outside (0, pi/(4T))")
    sgn = 1.0 if cone == "positive" else -1.0
    if probe_points is None:
        small = 10.0 ** np.arange(-1.0, -6.5, -0.5)
        large = 10.0 ** np.arange(1.0, 6.5, 0.5)
    else:
        pts = np.sort(np.abs(np.asarray(probe_points, float)))
        small, large = pts[pts < 1.0][::-1], pts[pts >= 1.0]
    ts = np.linspace(-T, T, n_t)

    sign_ok = True
    sign_witness = None

    def ratio_profile(probes):
        nonlocal sign_ok, sign_witness
        out = []
        for p in probes:
            x = sgn * p
            vals = np.array([f(float(t), x, x) for t in ts])
            if cone == "positive" and np.any(vals < 0):
                sign_ok = False
                sign_witness = (float(ts[int(np.argmin(vals))]), x, x, "f>=0")
            if cone == "negative" and np.any(vals < 0):
                sign_ok = False
                sign_witness = (float(ts[int(np.argmin(vals))]), x, x, "f>=0")
            out.append(float(np.max(np.abs(vals / x))))
        return np.array(out)

    def limit_class(probes, ratios, toward_zero):
        # slope of log|ratio| vs log|x|; ratio ~ |x|^p
        mask = ratios > 0
        if mask.sum() < 2:
            return "zero" if np.all(ratios == 0) else "inconclusive"
        p = np.polyfit(np.log(probes[mask]), np.log(ratios[mask]), 1)[0]
        if abs(p) < 0.1:
            return "finite"
        if toward_zero:
            return "zero" if p > 0 else "infinity"
        return "infinity" if p > 0 else "zero"

    r_small = ratio_profile(small)
    r_large = ratio_profile(large)
    at_zero = limit_class(small, r_small, toward_zero=True)
    at_inf = limit_class(large, r_large, toward_zero=False)

    if at_zero == "infinity" and at_inf == "zero":
        branch, verdict = 1, "condition_1"
    elif at_zero == "zero" and at_inf == "infinity":
        branch, verdict = 2, "condition_2"
    else:
        branch, verdict = None, "inconclusive"
    report = ExistenceReport(
        theorem="asymptotic_corollary" if cone == "positive" else "asymptotic_corollary_mirrored",
        branch=branch,
        verdict=verdict,
        margins={
            "ratio_smallest_probe": float(r_small[-1]),
            "ratio_largest_probe": float(r_large[-1]),
        },
        bounds={"m": m, "T": T},
        samples=int(n_t * (len(small) + len(large))),
        notes=[
            "sampling certificate, not a proof",
            f"limit trend at 0: {at_zero}; at infinity: {at_inf}",
            "uniformity in t assessed by max over the sampled t-grid",
        ],
    )
    if not sign_ok:
        report.verdict = "inconclusive"
        report.branch = None
        report.violation = sign_witness
        report.notes.append("sign hypothesis f >= 0 violated on samples")
    elif verdict != "inconclusive":
        report.verdict = "positive_solution" if cone == "positive" else "negative_solution"
        report.notes.append(f"classified {verdict}")
    return report


def fixed_point_operator(f, m: float, T: float, x: GridFunction, n_quad: int = 1024) -> GridFunction:
    """Apply (A x)(t) = integral Gbar(t,s) [f(s, x(-s), x(s)) + m x(-s)] ds.

    Fixed points of A solve the nonlinear periodic problem; the operator is
    also usable as a naive Picard iterator (no convergence guarantee).
    """
    params = ProblemParams(m=m, T=T)
    grid = x.grid()
    spline = CubicSpline(grid, x.values)
    solver = PeriodicGreenSolver(params, grid, n_quad=n_quad)

    def h(s):
        s = np.asarray(s, float)
        xr = spline(-s)
        xs = spline(s)
        try:
            vals = np.asarray(f(s, xr, xs), float)
            if vals.shape != s.shape:
                raise ValueError
        except (TypeError, ValueError):
            vals = np.array([f(float(a), float(b), float(c)) for a, b, c in zip(s, xr, xs)])
        return vals + m * xr

    return GridFunction(T, solver.solve(h))


def sweep_annulus(
    f,
    params: ProblemParams,
    r_values=None,
    R_values=None,
    variant: str = "positive",
    branch: int | None = 2,
    sample_density: int = 21,
    grid_n: int = 201,
    refine_iters: int = 2,
):
    """Scan a log-spaced (r, R) lattice for the first admissible pair.

    Returns (pair, report): pair is (r, R) when some pair satisfies the
    requested variant (and branch, when given) with all margins >= 0,
    otherwise None together with the best (least negative margin) report.
    """
    M, L, _, _ = kernel_bounds(params, grid_n=grid_n, refine_iters=refine_iters)
    if r_values is None:
        r_values = 10.0 ** np.arange(-4.0, 1.5, 0.5)
    if R_values is None:
        R_values = 10.0 ** np.arange(0.0, 5.5, 0.5)
    best = None
    for r in r_values:
        for R in R_values:
            if not r < R:
                continue
            bounds = ConeBounds(M=M, L=L, m=params.m, T=params.T, r=float(r), R=float(R))
            report = _check_variant(f, bounds, variant, sample_density, branches=(1, 2) if branch is None else (branch,))
            if report.verdict == "holds_on_samples" and (branch is None or report.branch == branch):
                return (float(r), float(R)), report
            if best is None or (report.min_margin or -math.inf) > (best.min_margin or -math.inf):
                best = report
    return None, best
