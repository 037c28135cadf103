"""Monotone iteration between lower and upper solutions for x'(t) = f(t, x(-t)).

Each sweep linearizes by adding m*x(-t) to both sides and inverting the
linear operator x' + m*x(-t) with periodic conditions, which is inverse
positive for m in (0, pi/(4T)] and inverse negative for the mirrored window.
Starting from a validated lower/upper pair, the two sequences are monotone
and bracket the extremal solutions; the reports certify monotonicity and the
final nonlinear residual, not extremality itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import BadWindow, MonotonicityBroken
from .kernel import ProblemParams
from .linsolve import GridFunction, PeriodicGreenSolver, ReflectionProblem, residual


class BracketOrdering(Enum):
    LOWER_ABOVE_UPPER = "lower_above_upper"  # lower >= upper, m > 0 regime
    LOWER_BELOW_UPPER = "lower_below_upper"  # lower <= upper, m < 0 regime


@dataclass
class LowerUpperPair:
    """Lower/upper solution bracket on a shared symmetric grid."""

    lower: GridFunction
    upper: GridFunction
    ordering: BracketOrdering

    def __post_init__(self):
        if self.lower.n != self.upper.n or self.lower.T != self.upper.T:
            raise ValueError("lower and upper must share the same grid")
        gap = self.lower.values - self.upper.values
        if self.ordering is BracketOrdering.LOWER_ABOVE_UPPER and np.any(gap < -1e-12):
            raise ValueError("declared ordering lower >= upper does not hold on the grid")
        if self.ordering is BracketOrdering.LOWER_BELOW_UPPER and np.any(gap > 1e-12):
            raise ValueError("declared ordering lower <= upper does not hold on the grid")


@dataclass
class Validity:
    valid: bool
    violations: list = field(default_factory=list)  # (t, margin) pairs

    def to_dict(self):
        return {"valid": self.valid, "violations": [list(v) for v in self.violations]}


def _inequality_check(candidate: GridFunction, f: Callable, sign: int, slack: float) -> Validity:
    """sign=+1 checks derivative >= f (lower solution), sign=-1 the reverse."""
    t = candidate.grid()
    v = candidate.values
    step = t[1] - t[0]
    dv = (v[2:] - v[:-2]) / (2.0 * step)
    refl = v[::-1]
    fv = np.array([f(ti, yi) for ti, yi in zip(t[1:-1], refl[1:-1])])
    margins = sign * (dv - fv)
    violations = [(float(t[1 + i]), float(m)) for i, m in enumerate(margins) if m < -slack]
    boundary = sign * (v[0] - v[-1])
    if boundary < -1e-12:
        violations.append((float(t[-1]), float(boundary)))
    return Validity(valid=not violations, violations=violations)


def check_lower(candidate: GridFunction, f: Callable, slack: float = 1e-8) -> Validity:
    """Discrete lower-solution test: x' >= f(t, x(-t)) and x(-T) >= x(T)."""
    return _inequality_check(candidate, f, +1, slack)


def check_upper(candidate: GridFunction, f: Callable, slack: float = 1e-8) -> Validity:
    """Discrete upper-solution test: x' <= f(t, x(-t)) and x(-T) <= x(T)."""
    return _inequality_check(candidate, f, -1, slack)


@dataclass
class LipschitzReport:
    holds: bool
    min_margin: float
    witness: tuple | None = None  # (t, x, y)

    def to_dict(self):
        return {
            "holds": self.holds,
            "min_margin": self.min_margin,
            "witness": None if self.witness is None else list(self.witness),
        }


def one_sided_lipschitz_check(
    f: Callable, bracket: LowerUpperPair, m: float, n_t: int = 41, n_xy: int = 41
) -> LipschitzReport:
    """Sample the one-sided Lipschitz condition on admissible (t, x, y) triples.

    For m > 0: f(t,x) - f(t,y) >= -m(x-y) on y <= x inside the bracket; for
    m < 0 the reversed inequality.  Sampling evidence only, never a proof.
    """
    T = bracket.lower.T
    if m > 0 and not m <= math.pi / (4 * T) + 1e-12:
        raise BadWindow(f"m={m} outside (0, pi/(4T)] for this check")
    if m < 0 and not -m <= math.pi / (4 * T) + 1e-12:
        raise BadWindow(f"m={m} outside [-pi/(4T), 0) for this check")
    grid = bracket.lower.grid()
    idx = np.unique(np.linspace(0, len(grid) - 1, n_t).astype(int))
    lo = np.minimum(bracket.lower.values, bracket.upper.values)
    hi = np.maximum(bracket.lower.values, bracket.upper.values)
    best = (math.inf, None)
    for i in idx:
        t = float(grid[i])
        xs = np.linspace(lo[i], hi[i], n_xy)
        fx = np.array([f(t, x) for x in xs])
        for j in range(n_xy):
            # y = xs[j] <= x = xs[j:]
            diff = fx[j:] - fx[j]
            gap = xs[j:] - xs[j]
            margins = diff + m * gap if m > 0 else -(m * gap) - diff
            k = int(np.argmin(margins))
            if margins[k] < best[0]:
                best = (float(margins[k]), (t, float(xs[j + k]), float(xs[j])))
    return LipschitzReport(holds=best[0] >= 0.0, min_margin=best[0], witness=best[1])


def _vectorized2(f: Callable) -> Callable:
    """Wrap a two-argument scalar function to accept equal-shape arrays."""

    def call(t, y):
        try:
            out = np.asarray(f(t, y), dtype=float)
            if out.shape == np.shape(t):
                return out
            if out.ndim == 0:
                return np.full(np.shape(t), float(out))
        except (TypeError, ValueError):
            pass
        return np.array([f(a, b) for a, b in zip(np.atleast_1d(t), np.atleast_1d(y))])

    return call


@dataclass
class IterationReport:
    """Certificates from the monotone iteration: iterates, gaps, residuals."""

    iterates_lower: list  # GridFunction sequence starting at the lower solution
    iterates_upper: list
    converged: bool
    iterations: int
    final_gap: float
    gap_history: list
    residual_lower: float
    residual_upper: float
    m_used: float
    monotone: bool = True
    note: str = "approximation of the extremal solutions; extremality not certified"

    def to_dict(self, include_iterates: bool = False):
        d = {
            "converged": self.converged,
            "iterations": self.iterations,
            "final_gap": self.final_gap,
            "gap_history": self.gap_history,
            "residual_lower": self.residual_lower,
            "residual_upper": self.residual_upper,
            "m_used": self.m_used,
            "monotone": self.monotone,
            "note": self.note,
        }
        if include_iterates:
            d["iterates_lower"] = [g.values.tolist() for g in self.iterates_lower]
            d["iterates_upper"] = [g.values.tolist() for g in self.iterates_upper]
        return d


def iterate(
    f: Callable,
    bracket: LowerUpperPair,
    m: float,
    n_quad: int = 1024,
    max_iters: int = 60,
    tol: float = 1e-8,
    monotone_slack: float = 1e-10,
    keep_iterates: bool = True,
) -> IterationReport:
    """Run the two monotone sequences from the bracket endpoints.

    Each step solves x' + m*x(-t) = f(t, x_n(-t)) + m*x_n(-t) with periodic
    conditions through the precomputed kernel quadrature; iterates are stored
    on the bracket grid and interpolated by cubic splines inside the
    quadrature.  Raises MonotonicityBroken if an iterate violates the
    expected ordering beyond monotone_slack.
    """
    T = bracket.lower.T
    params = ProblemParams(m=m, T=T)
    expected_window = (0 < m <= math.pi / (4 * T) + 1e-12) or (-math.pi / (4 * T) - 1e-12 <= m < 0)
    if not expected_window:
        raise BadWindow(f"m={m} outside the inverse-positive/negative windows for T={T}")

    grid = bracket.lower.grid()
    solver = PeriodicGreenSolver(params, grid, n_quad=n_quad)
    fv = _vectorized2(f)

    def advance(values: np.ndarray) -> np.ndarray:
        spline = CubicSpline(grid, values)

        def h(s):
            prev = spline(-np.asarray(s, float))
            return fv(s, prev) + m * prev

        return solver.solve(h)

    # descending sequence starts at the larger endpoint, ascending at the smaller
    if bracket.ordering is BracketOrdering.LOWER_ABOVE_UPPER:
        desc, asc = bracket.lower.values, bracket.upper.values
        desc_is_lower = True
    else:
        desc, asc = bracket.upper.values, bracket.lower.values
        desc_is_lower = False

    desc_seq, asc_seq = [desc], [asc]
    gap_history = [float(np.max(np.abs(desc - asc)))]
    converged = False
    iterations = 0
    for iterations in range(1, max_iters + 1):
        new_desc = advance(desc_seq[-1])
        new_asc = advance(asc_seq[-1])
        if np.any(new_desc - desc_seq[-1] > monotone_slack):
            raise MonotonicityBroken("descending sequence increased beyond slack")
        if np.any(asc_seq[-1] - new_asc > monotone_slack):
            raise MonotonicityBroken("ascending sequence decreased beyond slack")
        if np.any(new_asc - new_desc > monotone_slack):
            raise MonotonicityBroken("sequences crossed beyond slack")
        if np.any(new_desc - desc_seq[0] > monotone_slack) or np.any(asc_seq[0] - new_asc > monotone_slack):
            raise MonotonicityBroken("iterate left the initial bracket")
        step_desc = float(np.max(np.abs(new_desc - desc_seq[-1])))
        step_asc = float(np.max(np.abs(new_asc - asc_seq[-1])))
        desc_seq.append(new_desc)
        asc_seq.append(new_asc)
        gap_history.append(float(np.max(np.abs(new_desc - new_asc))))
        if max(step_desc, step_asc) <= tol:
            converged = True
            break

    def as_gridfns(seq):
        return [GridFunction(T, v.copy()) for v in seq]

    def nonlinear_residual(values: np.ndarray) -> float:
        u = GridFunction(T, values.copy())
        spline = CubicSpline(grid, values)

        def h(t):
            prev = spline(-np.asarray(t, float))
            return fv(t, prev) + m * prev

        return residual(ReflectionProblem(params, h), u)

    res_desc = nonlinear_residual(desc_seq[-1])
    res_asc = nonlinear_residual(asc_seq[-1])
    lower_seq, upper_seq = (desc_seq, asc_seq) if desc_is_lower else (asc_seq, desc_seq)
    res_lower, res_upper = (res_desc, res_asc) if desc_is_lower else (res_asc, res_desc)
    keep = as_gridfns if keep_iterates else (lambda seq: [GridFunction(T, seq[-1].copy())])
    return IterationReport(
        iterates_lower=keep(lower_seq),
        iterates_upper=keep(upper_seq),
        converged=converged,
        iterations=iterations,
        final_gap=gap_history[-1],
        gap_history=gap_history,
        residual_lower=res_lower,
        residual_upper=res_upper,
        m_used=m,
    )
