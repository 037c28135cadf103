"""Acceptance suite: one test per criterion, each reported as PASS/FAIL
in the terminal summary (see conftest).  Two sub-criteria are expected
failures with the faithful algorithms; the analysis lives outside the
package in the project notes.
"""

import math
import time

import numpy as np
import pytest

from refleq.catalog import hyperbolic_lag, lipschitz_bound_hyperbolic, squared_cosine_growth
from refleq.errors import ResonantKernel
from refleq.kernel import Kernel, ProblemParams, classify_sign, kernel_bounds, reflect_negate_residual
from refleq.linsolve import GridFunction, PeriodicGreenSolver, ReflectionProblem, residual, solve, solve_grid
from refleq.monotone import BracketOrdering, LowerUpperPair, iterate, one_sided_lipschitz_check
from refleq.reduce import (
    BoundaryMode,
    NonlinearProblem,
    filter_reflection_solution,
    integrate_ivp,
    integrate_rk4,
    logistic_family_solution,
    reduce_second_order,
    shoot_periodic,
    sinh_fixture,
)
from refleq.cone import check_asymptotic_corollary, sweep_annulus

PAIRS = [(0.3, 1.0), (-0.3, 1.0), (0.7, 1.0), (1.5, 1.0), (0.5, 2.0)]


def test_criterion_01_kernel_identities():
    start = time.time()
    for m, T in PAIRS:
        k = Kernel(ProblemParams(m, T))
        u = np.linspace(-T, T, 201)
        tt, ss = np.meshgrid(u, u, indexing="ij")
        g = k.g(tt, ss)
        # (VI) G(t,s) = G(s,t); (VII) G(t,s) = G(-t,-s)
        assert np.max(np.abs(g - k.g(ss, tt))) <= 1e-12
        assert np.max(np.abs(g - k.g(-tt, -ss))) <= 1e-12
        # (V') Gbar(t,s) = Gbar(-s,-t)
        gb = k.gbar(tt, ss)
        assert np.max(np.abs(gb - k.gbar(-ss, -tt))) <= 1e-12
        # Lemma (Gop)
        assert reflect_negate_residual(k, Kernel(ProblemParams(-m, T)), grid_n=201) <= 1e-12
        # (II') jump = 1 from the closed-form one-sided limits
        left, right = k.gbar_diagonal_limits(u)
        assert np.max(np.abs((left - right) - 1.0)) <= 1e-10

        # finite-difference residuals off the diagonals, relative
        eps1, eps2 = 1e-6 * T, 1e-4 * T
        pts_t = np.linspace(-T, T, 41)[3:-3]
        pts_s = np.linspace(-T, T, 43)[3:-3]
        ft, fs = np.meshgrid(pts_t, pts_s, indexing="ij")
        off = (np.abs(ft - fs) > 10 * eps2) & (np.abs(ft + fs) > 10 * eps2)
        ft, fs = ft[off], fs[off]
        # (IV) d2G/dt2 + m^2 G = 0
        d2 = (k.g(ft + eps2, fs) - 2 * k.g(ft, fs) + k.g(ft - eps2, fs)) / eps2**2
        scale = max(1.0, m**2 * float(np.max(np.abs(g))))
        assert np.max(np.abs(d2 + m**2 * k.g(ft, fs))) <= 1e-6 * scale
        # (III') dGbar/dt + m Gbar(-t,s) = 0
        d1 = (k.gbar(ft + eps1, fs) - k.gbar(ft - eps1, fs)) / (2 * eps1)
        scale = max(1.0, abs(m) * float(np.max(np.abs(gb))))
        assert np.max(np.abs(d1 + m * k.gbar(-ft, fs))) <= 1e-6 * scale
        # (X) dG/dt = -dG/ds
        gt = (k.g(ft + eps1, fs) - k.g(ft - eps1, fs)) / (2 * eps1)
        gs = (k.g(ft, fs + eps1) - k.g(ft, fs - eps1)) / (2 * eps1)
        scale = max(1.0, float(np.max(np.abs(gt))))
        assert np.max(np.abs(gt + gs)) <= 1e-6 * scale
    assert time.time() - start < 10.0


def test_criterion_02_sign_theorem():
    T = 1.0
    u = np.linspace(-T, T, 201)
    tt, ss = np.meshgrid(u, u, indexing="ij")
    for alpha in np.linspace(0.015, math.pi / 4 - 0.015, 20):
        assert np.min(Kernel(ProblemParams(alpha, T)).gbar(tt, ss)) > 0
        assert np.max(Kernel(ProblemParams(-alpha, T)).gbar(tt, ss)) < 0
    for alpha in (1.0, 2.0, 3.0):
        for a in (alpha, -alpha):
            vals = Kernel(ProblemParams(a, T)).gbar(tt, ss)
            assert np.min(vals) < 0 < np.max(vals)
    for sign in (1.0, -1.0):
        a = sign * math.pi / 4
        rep = classify_sign(ProblemParams(a, T))
        k = Kernel(ProblemParams(a, T))
        P = rep.vanishing_set
        assert max(abs(k.gbar(p, q)) for p, q in P) <= 1e-10
        vals = k.gbar(tt, ss)
        mask = np.ones_like(vals, dtype=bool)
        for p, q in P:
            mask &= ~(np.isclose(tt, p) & np.isclose(ss, q))
        if sign > 0:
            assert np.min(vals[mask]) > 0
        else:
            assert np.max(vals[mask]) < 0


def test_criterion_03_row_integral():
    for m, T in PAIRS:
        t = np.linspace(-T, T, 11)
        solver = PeriodicGreenSolver(ProblemParams(m, T), t, n_quad=2000)
        vals = solver.solve(lambda s: 1.0)
        assert np.max(np.abs(vals - 1.0 / m)) <= 1e-8


def test_criterion_04_manufactured_solution():
    m, T = 1.0, 1.0
    h = lambda t: np.cos(t) - np.sin(t)
    prob = ReflectionProblem(ProblemParams(m, T), h)
    u = solve_grid(prob, n=1000, n_quad=2000)
    assert np.max(np.abs(u.values - np.cos(u.grid()))) <= 1e-6
    assert residual(prob, u) <= 1e-4
    pts = np.linspace(-T, T, 21)
    errs = [
        np.max(np.abs(solve(prob, n_quad=nq, eval_points=pts) - np.cos(pts)))
        for nq in (50, 100, 200, 400)
    ]
    orders = [math.log2(errs[i] / errs[i + 1]) for i in range(len(errs) - 1)]
    assert min(orders) >= 3.5


def test_criterion_05_comparison_principle():
    T = 1.0
    h = lambda t: 1.0
    u1 = solve_grid(ReflectionProblem(ProblemParams(0.3, T), h), n=200)
    u2 = solve_grid(ReflectionProblem(ProblemParams(0.7, T), h), n=200)
    assert np.min(u1.values - u2.values) > 0
    u = np.linspace(-T, T, 201)
    tt, ss = np.meshgrid(u, u, indexing="ij")
    gap = Kernel(ProblemParams(0.3, T)).gbar(tt, ss) - Kernel(ProblemParams(0.7, T)).gbar(tt, ss)
    assert np.min(gap) > 0


def test_criterion_06_reduction_equivalence():
    T = 0.5
    red = reduce_second_order(**sinh_fixture())
    for x0 in (-0.5, -0.1, 0.3, 0.8):
        prob = NonlinearProblem(
            f=lambda t, y, x: math.sinh(y), T=T, mode=BoundaryMode.INITIAL_VALUE, x0=x0
        )
        sol = integrate_ivp(prob, n_steps=1000)  # step 1e-3

        def rhs2(t, state):
            x, xp = state
            return np.array([xp, red.rhs(t, x, xp)])

        init = red.initial_state(x0)
        _, sf = integrate_rk4(rhs2, 0.0, T, init, 500)
        _, sb = integrate_rk4(rhs2, 0.0, -T, init, 500)
        x2 = np.concatenate([sb[::-1, 0], sf[1:, 0]])
        assert np.max(np.abs(sol.x_values - x2)) <= 1e-6


def test_criterion_07_spurious_filter():
    times = np.linspace(-1.0, 1.0, 2001)
    fam = logistic_family_solution(1.0, times)
    verdict = filter_reflection_solution(fam)
    assert not verdict.genuine
    assert verdict.boundary_defect == pytest.approx((math.e - 1) / (math.e + 1), abs=1e-8)
    prob = NonlinearProblem(f=lambda t, y, x: x * y, T=1.0)
    for guess in ((0.0, 0.0), (1e-3, -1e-3)):
        sol = shoot_periodic(prob, guess=guess)
        assert filter_reflection_solution(sol).genuine
        assert np.max(np.abs(sol.x_values)) <= 1e-5


def test_criterion_08_cross_validation():
    m, T = 0.5, 1.0
    prob = NonlinearProblem(f=lambda t, y, x: 1.0 - m * y, T=T)
    sol = shoot_periodic(prob, guess=(0.0, 0.0), n_steps=2000)
    lin = solve(ReflectionProblem(ProblemParams(m, T), lambda s: 1.0), eval_points=sol.times)
    assert np.max(np.abs(sol.x_values - lin)) <= 1e-5


@pytest.fixture(scope="module")
def exa3_report():
    T = 1.0
    lower = GridFunction.from_callable(lambda t: T, T, 256)
    upper = GridFunction.from_callable(lambda t: -T, T, 256)
    pair = LowerUpperPair(lower, upper, BracketOrdering.LOWER_ABOVE_UPPER)
    return pair, iterate(hyperbolic_lag(0.1), pair, m=math.pi / 4, n_quad=1024, max_iters=60, tol=1e-8)


def test_criterion_09_monotone_method(exa3_report):
    pair, rep = exa3_report
    # monotone to slack 1e-10 (enforced inside iterate; re-check here)
    lows = [g.values for g in rep.iterates_lower]
    ups = [g.values for g in rep.iterates_upper]
    for a, b in zip(lows, lows[1:]):
        assert np.all(b <= a + 1e-10)
    for a, b in zip(ups, ups[1:]):
        assert np.all(b >= a - 1e-10)
    # limits inside [-1, 1]
    assert np.all(np.abs(lows[-1]) <= 1.0 + 1e-10)
    assert np.all(np.abs(ups[-1]) <= 1.0 + 1e-10)
    # nonlinear residual of both limits
    assert rep.residual_lower <= 1e-5
    assert rep.residual_upper <= 1e-5
    # admissibility bound pi/(4T cosh 2T), numeric value
    assert lipschitz_bound_hyperbolic(1.0) == pytest.approx(0.2087605823532, abs=1e-12)
    assert one_sided_lipschitz_check(hyperbolic_lag(0.2), pair, math.pi / 4).holds
    assert not one_sided_lipschitz_check(hyperbolic_lag(0.25), pair, math.pi / 4).holds


@pytest.mark.xfail(
    strict=True,
    reason="the standard monotone scheme contracts at rate ~0.85 per sweep for "
    "these parameters; reaching a 1e-8 gap needs ~118 iterations, not 60",
)
def test_criterion_09_gap_within_60_iterations(exa3_report):
    _, rep = exa3_report
    assert rep.converged
    assert rep.iterations <= 60
    assert rep.final_gap <= 1e-8


def test_criterion_10_asymptotic_corollary():
    rp = check_asymptotic_corollary(squared_cosine_growth, 0.5, 1.0, cone="positive")
    assert rp.verdict == "positive_solution"
    assert rp.branch == 2
    rn = check_asymptotic_corollary(squared_cosine_growth, 0.5, 1.0, cone="negative")
    assert rn.verdict == "negative_solution"
    assert rn.branch == 2


@pytest.mark.xfail(
    strict=True,
    reason="branch-2 small-argument inequality f + m x <= x/(2TM) cannot hold "
    "for nonnegative f because sup Gbar exceeds the row average 1/(2Tm), "
    "so m > 1/(2TM) for every admissible (r, R)",
)
def test_criterion_10_sweep_finds_pair():
    pair, _ = sweep_annulus(squared_cosine_growth, ProblemParams(0.5, 1.0), branch=2)
    assert pair is not None


def test_criterion_11_resonance_guard():
    T = 1.0
    for k in (1, 2):
        m = k * math.pi / T
        p = ProblemParams(m, T)
        kern = Kernel(p)
        with pytest.raises(ResonantKernel):
            kern.g(0.1, 0.2)
        with pytest.raises(ResonantKernel):
            kern.gbar(0.1, 0.2)
        with pytest.raises(ResonantKernel):
            kern.gbar_diagonal_limits(0.1)
        with pytest.raises(ResonantKernel):
            kernel_bounds(p, grid_n=11, refine_iters=0)
        with pytest.raises(ResonantKernel):
            solve(ReflectionProblem(p, lambda t: 1.0), n_quad=64, eval_points=[0.0])
        for m_ok in (m - 1e-3, m + 1e-3):
            vals = solve(
                ReflectionProblem(ProblemParams(m_ok, T), lambda t: 1.0), n_quad=200, eval_points=[0.0]
            )
            assert np.all(np.isfinite(vals))
