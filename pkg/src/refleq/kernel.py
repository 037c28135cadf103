"""Closed-form kernels for the periodic problem x'(t) + m*x(-t) = h(t) on [-T, T].

Two kernels live here: the constant-coefficient second-order kernel G
(for x'' + m^2 x = f with periodic conditions) and the reflection kernel
Gbar built from it, which represents the unique periodic solution as
u(t) = integral of Gbar(t,s) h(s) ds.  Both are evaluated from explicit
piecewise trigonometric formulas, so evaluation is cheap, exact up to
rounding, and vectorizes over numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import InternalInconsistency, OnDiagonal, OutOfDomain, ParameterMismatch, ResonantKernel

#: default absolute tolerance on |alpha - k*pi| below which the problem is
#: treated as resonant (the closed form divides by sin(m*T))
RESONANCE_TOL = 1e-9

_PI4 = math.pi / 4.0


@dataclass(frozen=True)
class ProblemParams:
    """Coefficient m (nonzero) and half-length T > 0 of the interval [-T, T]."""

    m: float
    T: float

    def __post_init__(self):
        if self.m == 0:
            raise ValueError("m must be nonzero")
        if not self.T > 0:
            raise ValueError("T must be strictly positive")

    @property
    def alpha(self) -> float:
        return self.m * self.T


@dataclass(frozen=True)
class Resonance:
    """Result of the eigenvalue check: resonant iff alpha is a multiple of pi."""

    resonant: bool
    k: int | None = None


def check_resonance(params: ProblemParams, tol: float = RESONANCE_TOL) -> Resonance:
    """Classify (m, T) as resonant (m = k*pi/T within tol) or not.

    Total function: never raises for well-formed params.
    """
    k = round(params.alpha / math.pi)
    if abs(params.alpha - k * math.pi) <= tol:
        return Resonance(True, abs(k))
    return Resonance(False)


class DiagonalConvention(Enum):
    """How the jump diagonal s = t is filled in: one-sided limit in s."""

    LIMIT_FROM_ABOVE = "above"  # m > 0
    LIMIT_FROM_BELOW = "below"  # m < 0


class Kernel:
    """Lazy closed-form evaluator for G and Gbar.

    Pure and reentrant: no mutable state after construction, safe to share
    between threads.
    """

    def __init__(self, params: ProblemParams, tol_res: float = RESONANCE_TOL):
        self.params = params
        self.tol_res = tol_res
        self._resonance = check_resonance(params, tol_res)
        if params.m > 0:
            self.diagonal_convention = DiagonalConvention.LIMIT_FROM_ABOVE
        else:
            self.diagonal_convention = DiagonalConvention.LIMIT_FROM_BELOW

    # -- guards ------------------------------------------------------------

    def require_nonresonant(self):
        if self._resonance.resonant:
            raise ResonantKernel(self.params.m, self.params.T, self._resonance.k)

    def _check_domain(self, *points):
        T = self.params.T
        for p in points:
            a = np.asarray(p, dtype=float)
            if np.any(np.abs(a) > T * (1 + 1e-12)):
                raise OutOfDomain(f"point outside [-{T}, {T}]")

    # -- second-order kernel G ----------------------------------------------

    def g(self, t, s):
        """G(t,s) = cos(m(T+s-t)) / (2m sin(mT)) for s <= t, reflected arg for s > t.

        Continuous across s = t, so no diagonal convention is needed.
        """
        self.require_nonresonant()
        self._check_domain(t, s)
        m, T = self.params.m, self.params.T
        t, s = np.broadcast_arrays(np.asarray(t, float), np.asarray(s, float))
        arg = np.where(s <= t, T + s - t, T - s + t)
        out = np.cos(m * arg) / (2.0 * m * math.sin(m * T))
        return out if out.ndim else float(out)

    # -- reflection kernel Gbar ----------------------------------------------

    def _gbar_numerator(self, z, y):
        """2*sin(alpha)*Gbar at scaled coordinates z = t/T, y = s/T.

        Four analytic branches partition |y| != |z|; the anti-diagonal
        y = -z is a removable branch boundary (the adjacent formulas agree),
        here served by the '-z <= y < z' and '-y <= z < y' branches.  The
        jump diagonal y == z takes the one-sided limit per the convention.
        """
        a = self.params.alpha
        out = np.empty(z.shape)
        diag = y == z
        c1 = ~diag & (-z <= y) & (y < z)
        c2 = ~diag & (-y <= z) & (z < y)
        c3 = ~diag & (y < -np.abs(z))
        c4 = ~diag & (z < -np.abs(y))
        out[c1] = np.cos(a * (1 - y[c1] - z[c1])) + np.sin(a * (1 + y[c1] - z[c1]))
        out[c2] = np.cos(a * (1 - y[c2] - z[c2])) - np.sin(a * (1 - y[c2] + z[c2]))
        out[c3] = np.cos(a * (1 + y[c3] + z[c3])) + np.sin(a * (1 + y[c3] - z[c3]))
        out[c4] = np.cos(a * (1 + y[c4] + z[c4])) - np.sin(a * (1 - y[c4] + z[c4]))
        sgn = 1.0 if self.params.m > 0 else -1.0
        out[diag] = np.cos(a * (1 - 2 * np.abs(z[diag]))) - sgn * math.sin(a)
        return out

    def _gbar_numerator_factored(self, z, y):
        """Factorized form of the same numerator, used as a cross-check.

        Each branch is a product of two cos(.)+-sin(.) factors; must agree
        with the direct branch formulas to machine precision.
        """
        a = self.params.alpha
        out = np.empty(z.shape)
        diag = y == z
        c1 = ~diag & (-z <= y) & (y < z)
        c2 = ~diag & (-y <= z) & (z < y)
        c3 = ~diag & (y < -np.abs(z))
        c4 = ~diag & (z < -np.abs(y))

        def ps(x):  # cos + sin
            return np.cos(x) + np.sin(x)

        def ms(x):  # cos - sin
            return np.cos(x) - np.sin(x)

        out[c1] = ps(a * (1 - z[c1])) * ps(a * y[c1])
        out[c2] = ms(a * z[c2]) * ps(a * (y[c2] - 1))
        out[c3] = ps(a * (1 + y[c3])) * ms(a * z[c3])
        out[c4] = ps(a * y[c4]) * ms(a * (z[c4] + 1))
        sgn = 1.0 if self.params.m > 0 else -1.0
        out[diag] = np.cos(a * (1 - 2 * np.abs(z[diag]))) - sgn * math.sin(a)
        return out

    def gbar(self, t, s, factored: bool = False):
        """Reflection kernel Gbar(t, s); diagonal filled by the convention."""
        self.require_nonresonant()
        self._check_domain(t, s)
        T = self.params.T
        z, y = np.broadcast_arrays(np.asarray(t, float) / T, np.asarray(s, float) / T)
        num = self._gbar_numerator_factored(z, y) if factored else self._gbar_numerator(z, y)
        out = num / (2.0 * math.sin(self.params.alpha))
        return out if out.ndim else float(out)

    def gbar_diagonal_limits(self, t):
        """One-sided limits (Gbar(t, t-), Gbar(t, t+)) from the closed form.

        Their difference is exactly 1 (after division by 2 sin(alpha)).
        """
        self.require_nonresonant()
        self._check_domain(t)
        a = self.params.alpha
        z = np.asarray(t, float) / self.params.T
        base = np.cos(a * (1 - 2 * np.abs(z)))
        denom = 2.0 * math.sin(a)
        left = (base + math.sin(a)) / denom
        right = (base - math.sin(a)) / denom
        if not np.ndim(left):
            return float(left), float(right)
        return left, right

    def gbar_dt(self, t, s):
        """d(Gbar)/dt via the analytic identity dGbar/dt(t,s) = -m*Gbar(-t,s).

        Only defined off both diagonals |t| != |s|.
        """
        t_a = np.asarray(t, float)
        s_a = np.asarray(s, float)
        tol = 1e-12 * max(1.0, self.params.T)
        if np.any(np.abs(np.abs(t_a) - np.abs(s_a)) <= tol):
            raise OnDiagonal("gbar_dt undefined on |t| = |s|")
        return -self.params.m * self.gbar(-t_a, s_a)

    def bounds(self, grid_n: int = 201, refine_iters: int = 2):
        """Extrema of Gbar over the closed square; see :func:`kernel_bounds`."""
        return kernel_bounds(self.params, grid_n=grid_n, refine_iters=refine_iters, tol_res=self.tol_res)


def reflect_negate_residual(kernel_pos: Kernel, kernel_neg: Kernel, grid_n: int = 101) -> float:
    """Max residual of the identity Gbar_a(t,s) = -Gbar_{-a}(-t,-s) on a grid.

    Raises ParameterMismatch unless the kernels are an (m, -m) pair with
    equal T.  The grid includes the diagonal, exercising the fact that the
    two kernels use opposite one-sided conventions there.
    """
    p1, p2 = kernel_pos.params, kernel_neg.params
    if p1.T != p2.T or p1.m != -p2.m:
        raise ParameterMismatch(f"kernels must share T and have opposite m; got {p1} and {p2}")
    T = p1.T
    u = np.linspace(-T, T, grid_n)
    tt, ss = np.meshgrid(u, u, indexing="ij")
    return float(np.max(np.abs(kernel_pos.gbar(tt, ss) + kernel_neg.gbar(-tt, -ss))))


class SignClass(Enum):
    STRICTLY_POSITIVE = "strictly_positive"
    STRICTLY_NEGATIVE = "strictly_negative"
    NONNEG_VANISHING_ON_P = "nonneg_vanishing_on_P"
    NONPOS_VANISHING_ON_P = "nonpos_vanishing_on_P"
    MIXED_SIGN = "mixed_sign"
    RESONANT = "resonant"


@dataclass
class SignReport:
    """Sign classification of Gbar on the closed square, with grid witnesses."""

    classification: SignClass
    alpha: float
    witnesses: list = field(default_factory=list)  # (t, s, value) triples
    vanishing_set: list | None = None

    def to_dict(self):
        return {
            "classification": self.classification.value,
            "alpha": self.alpha,
            "witnesses": [list(w) for w in self.witnesses],
            "vanishing_set": None if self.vanishing_set is None else [list(p) for p in self.vanishing_set],
        }


def _corner_set(T: float, m: float):
    # the four points where Gbar vanishes at |alpha| = pi/4; the off-diagonal
    # corner mirrors through (t,s) -> (-t,-s) when m flips sign
    corner = (T, -T) if m > 0 else (-T, T)
    return [(-T, -T), (0.0, 0.0), (T, T), corner]


def classify_sign(params: ProblemParams, grid_n: int = 201, tol_res: float = RESONANCE_TOL) -> SignReport:
    """Sign classification of Gbar driven by alpha, verified on a grid.

    alpha in (0, pi/4): strictly positive; (-pi/4, 0): strictly negative;
    exactly +-pi/4: one-signed, vanishing precisely on the four points P;
    |alpha| > pi/4 non-resonant: takes both signs; resonant: undefined.
    Raises InternalInconsistency if the grid evidence contradicts the
    analytic classification (never expected).
    """
    if grid_n < 3:
        raise ValueError("grid_n must be >= 3")
    if check_resonance(params, tol_res).resonant:
        return SignReport(SignClass.RESONANT, params.alpha)

    a, T = params.alpha, params.T
    boundary = abs(abs(a) - _PI4) <= 1e-12
    if boundary:
        expected = SignClass.NONNEG_VANISHING_ON_P if a > 0 else SignClass.NONPOS_VANISHING_ON_P
    elif 0 < a < _PI4:
        expected = SignClass.STRICTLY_POSITIVE
    elif -_PI4 < a < 0:
        expected = SignClass.STRICTLY_NEGATIVE
    else:
        expected = SignClass.MIXED_SIGN

    kern = Kernel(params, tol_res)
    u = np.linspace(-T, T, grid_n)
    tt, ss = np.meshgrid(u, u, indexing="ij")
    vals = kern.gbar(tt, ss)
    imin = np.unravel_index(np.argmin(vals), vals.shape)
    imax = np.unravel_index(np.argmax(vals), vals.shape)
    wmin = (float(tt[imin]), float(ss[imin]), float(vals[imin]))
    wmax = (float(tt[imax]), float(ss[imax]), float(vals[imax]))

    if expected is SignClass.STRICTLY_POSITIVE:
        if not wmin[2] > 0:
            raise InternalInconsistency(f"expected strictly positive, grid min {wmin}")
        return SignReport(expected, a, witnesses=[wmin, wmax])
    if expected is SignClass.STRICTLY_NEGATIVE:
        if not wmax[2] < 0:
            raise InternalInconsistency(f"expected strictly negative, grid max {wmax}")
        return SignReport(expected, a, witnesses=[wmin, wmax])
    if expected in (SignClass.NONNEG_VANISHING_ON_P, SignClass.NONPOS_VANISHING_ON_P):
        P = _corner_set(T, params.m)
        pvals = [kern.gbar(p[0], p[1]) for p in P]
        if max(abs(v) for v in pvals) > 1e-10:
            raise InternalInconsistency(f"Gbar does not vanish on P: {pvals}")
        # mask the vanishing points out and check the strict sign elsewhere
        off = np.ones_like(vals, dtype=bool)
        for p in P:
            off &= ~(np.isclose(tt, p[0]) & np.isclose(ss, p[1]))
        side = vals[off]
        ok = np.all(side > 0) if expected is SignClass.NONNEG_VANISHING_ON_P else np.all(side < 0)
        if not ok:
            raise InternalInconsistency("sign off the vanishing set contradicts classification")
        return SignReport(expected, a, witnesses=[wmin, wmax], vanishing_set=P)
    # mixed sign
    if not (wmin[2] < 0 < wmax[2]):
        raise InternalInconsistency(f"expected both signs on grid, got min {wmin}, max {wmax}")
    return SignReport(SignClass.MIXED_SIGN, a, witnesses=[wmax, wmin])


def _gbar_samples_with_limits(kern: Kernel, tvals: np.ndarray, svals: np.ndarray):
    """Stacked (t, s, value) candidates over tvals x svals.

    Adds both one-sided diagonal limits for every t in tvals: the supremum
    and infimum of Gbar over the closed square are approached there, on
    whichever side the convention discards.
    """
    tt, ss = np.meshgrid(tvals, svals, indexing="ij")
    vals = kern.gbar(tt, ss)
    left, right = kern.gbar_diagonal_limits(tvals)
    left = np.atleast_1d(left)
    right = np.atleast_1d(right)
    cand_t = np.concatenate([tt.ravel(), tvals, tvals])
    cand_s = np.concatenate([ss.ravel(), tvals, tvals])
    cand_v = np.concatenate([vals.ravel(), left, right])
    return cand_t, cand_s, cand_v


def kernel_bounds(
    params: ProblemParams,
    grid_n: int = 201,
    refine_iters: int = 2,
    tol_res: float = RESONANCE_TOL,
):
    """(M, L, argmax, argmin): extrema of Gbar over the closed square.

    Grid search over grid_n x grid_n (both one-sided diagonal values
    included), then refine_iters rounds of local subdivision around each
    extremizer.  M is the supremum estimate, L the infimum estimate.
    """
    if grid_n < 3:
        raise ValueError("grid_n must be >= 3")
    kern = Kernel(params, tol_res)
    kern.require_nonresonant()
    T = params.T
    u = np.linspace(-T, T, grid_n)
    ct, cs, cv = _gbar_samples_with_limits(kern, u, u)
    step = 2 * T / (grid_n - 1)

    def refine(idx, pick):
        t0, s0 = ct[idx], cs[idx]
        best = (cv[idx], t0, s0)
        h = 2 * step
        for _ in range(refine_iters):
            tv = np.clip(np.linspace(best[1] - h, best[1] + h, 41), -T, T)
            sv = np.clip(np.linspace(best[2] - h, best[2] + h, 41), -T, T)
            rt, rs, rv = _gbar_samples_with_limits(kern, np.unique(tv), np.unique(sv))
            j = pick(rv)
            cand = (rv[j], rt[j], rs[j])
            if pick is np.argmax:
                best = max(best, cand)
            else:
                best = min(best, cand)
            h /= 10.0
        return best

    vmax, tmax, smax = refine(int(np.argmax(cv)), np.argmax)
    vmin, tmin, smin = refine(int(np.argmin(cv)), np.argmin)
    return float(vmax), float(vmin), (float(tmax), float(smax)), (float(tmin), float(smin))
