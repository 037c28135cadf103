"""Reductions between reflection equations and ordinary differential systems.

A first-order equation x'(t) = f(x(phi(t))) with an involution phi can be
rewritten as a second-order ODE; the reflection case x'(t) = f(t, x(-t), x(t))
reduces to a coupled 2-D system in (y, x) with y(t) = x(-t).  Both reductions
can manufacture spurious solutions: solving the system is necessary but not
sufficient, so solutions are filtered against the original problem afterwards.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np

from .errors import NoConvergence, NonFinite, SingularJacobian


@dataclass
class Involution:
    """A self-inverse map phi (not the identity) with derivative and fixed point."""

    phi: Callable
    dphi: Callable
    fixed_point: float = 0.0

    def validate(self, samples, tol: float = 1e-10):
        """Check phi(phi(t)) = t on samples and phi(c) = c."""
        worst = max(abs(self.phi(self.phi(t)) - t) for t in samples)
        if worst > tol:
            raise ValueError(f"phi is not an involution on the samples (defect {worst:.3e})")
        c = self.fixed_point
        if abs(self.phi(c) - c) > tol:
            raise ValueError(f"phi({c}) != {c}")
        if all(abs(self.phi(t) - t) <= tol for t in samples):
            raise ValueError("phi must differ from the identity")


REFLECTION = Involution(phi=lambda t: -t, dphi=lambda t: -1.0, fixed_point=0.0)


class BoundaryMode(Enum):
    PERIODIC = "periodic"  # x(-T) = x(T)
    INITIAL_VALUE = "ivp"  # x(0) = x0


@dataclass
class NonlinearProblem:
    """x'(t) = f(t, x(-t), x(t)) on [-T, T] with periodic or initial data.

    f takes (t, y, x) where y stands for x(-t).  Caratheodory regularity in
    t is the caller's responsibility; only pointwise evaluations are used.
    """

    f: Callable
    T: float
    mode: BoundaryMode = BoundaryMode.PERIODIC
    x0: float | None = None

    def __post_init__(self):
        if self.mode is BoundaryMode.INITIAL_VALUE and self.x0 is None:
            raise ValueError("initial-value mode requires x0")


def xi_map(t, z, w):
    """(t, z, w) -> (t, y, x) = (t, z - w, z + w)."""
    return t, z - w, z + w


def xi_inverse(t, y, x):
    """(t, y, x) -> (t, z, w) = (t, (x+y)/2, (x-y)/2)."""
    return t, (x + y) / 2.0, (x - y) / 2.0


@dataclass
class SecondOrderReduction:
    """Second-order form of x'(t) = f_scalar(x(phi(t))): RHS and initial data."""

    rhs: Callable  # (t, x, xp) -> x''
    initial_state: Callable  # x_c -> (x(c), x'(c))
    fixed_point: float


def reduce_second_order(
    f_scalar: Callable, finv: Callable, fprime: Callable, involution: Involution
) -> SecondOrderReduction:
    """Turn x' = f(x(phi(t))) into x'' = f'(f^{-1}(x')) * f(x) * phi'(t).

    The induced data at the fixed point c of phi are x(c) = x_c and
    x'(c) = f(x_c).  finv must invert f_scalar on the range visited during
    integration; a DomainViolation from finv propagates to the caller.
    """

    def rhs(t, x, xp):
        return fprime(finv(xp)) * f_scalar(x) * involution.dphi(t)

    def initial_state(x_c):
        return float(x_c), float(f_scalar(x_c))

    return SecondOrderReduction(rhs=rhs, initial_state=initial_state, fixed_point=involution.fixed_point)


@dataclass
class SystemReduction:
    """Coupled 2-D system for the reflection problem, state (y, x).

    x' = f(t, y, x),  y' = -f(-t, x, y);
    periodic mode imposes (y, x)(-T) = (x, y)(T), initial-value mode
    (y, x)(0) = (x0, x0).
    """

    problem: NonlinearProblem
    rhs: Callable = field(init=False)

    def __post_init__(self):
        f = self.problem.f

        def rhs(t, state):
            y, x = state
            return np.array([-f(-t, x, y), f(t, y, x)], dtype=float)

        self.rhs = rhs

    def zw_view(self, y_values, x_values):
        """Even/odd components z = (x+y)/2, w = (x-y)/2 for diagnostics."""
        y_values = np.asarray(y_values, float)
        x_values = np.asarray(x_values, float)
        return (x_values + y_values) / 2.0, (x_values - y_values) / 2.0


def reduce_system(problem: NonlinearProblem) -> SystemReduction:
    return SystemReduction(problem)


@dataclass
class SystemSolution:
    """Trajectory of the (y, x) system on a uniform grid over [-T, T]."""

    times: np.ndarray
    y_values: np.ndarray
    x_values: np.ndarray

    @property
    def z_values(self) -> np.ndarray:
        return (self.x_values + self.y_values) / 2.0

    @property
    def w_values(self) -> np.ndarray:
        return (self.x_values - self.y_values) / 2.0

    def to_csv_rows(self):
        yield ["t", "y", "x", "z", "w"]
        z, w = self.z_values, self.w_values
        for i, t in enumerate(self.times):
            yield [format(v, ".17g") for v in (t, self.y_values[i], self.x_values[i], z[i], w[i])]


def integrate_rk4(rhs: Callable, start: float, end: float, init, n_steps: int):
    """Classical fixed-step RK4; returns (times, states) with the full trajectory.

    states has shape (n_steps+1, dim).  Raises NonFinite on blow-up.
    """
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    y = np.atleast_1d(np.asarray(init, dtype=float))
    dim = len(y)
    h = (end - start) / n_steps
    times = start + h * np.arange(n_steps + 1)
    states = np.empty((n_steps + 1, dim))
    states[0] = y
    # overflow is expected on blow-up and surfaces as NonFinite, not a warning
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(n_steps):
            t = times[i]
            k1 = np.asarray(rhs(t, y), float)
            k2 = np.asarray(rhs(t + h / 2, y + h / 2 * k1), float)
            k3 = np.asarray(rhs(t + h / 2, y + h / 2 * k2), float)
            k4 = np.asarray(rhs(t + h, y + h * k3), float)
            y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            if not np.all(np.isfinite(y)):
                raise NonFinite(f"state became non-finite at t={times[i + 1]}")
            states[i + 1] = y
    return times, states


def _integrate_system(problem: NonlinearProblem, init_at_minus_T, n_steps: int) -> SystemSolution:
    sys_red = reduce_system(problem)
    times, states = integrate_rk4(sys_red.rhs, -problem.T, problem.T, init_at_minus_T, n_steps)
    return SystemSolution(times=times, y_values=states[:, 0], x_values=states[:, 1])


def integrate_ivp(problem: NonlinearProblem, n_steps: int) -> SystemSolution:
    """Initial-value trajectory on [-T, T], integrating out from t = 0."""
    if problem.mode is not BoundaryMode.INITIAL_VALUE:
        raise ValueError("problem is not in initial-value mode")
    sys_red = reduce_system(problem)
    half = n_steps // 2
    init = (problem.x0, problem.x0)
    t_fwd, s_fwd = integrate_rk4(sys_red.rhs, 0.0, problem.T, init, half)
    t_bwd, s_bwd = integrate_rk4(sys_red.rhs, 0.0, -problem.T, init, half)
    times = np.concatenate([t_bwd[::-1], t_fwd[1:]])
    states = np.vstack([s_bwd[::-1], s_fwd[1:]])
    return SystemSolution(times=times, y_values=states[:, 0], x_values=states[:, 1])


def shoot_periodic(
    problem: NonlinearProblem,
    guess=(0.0, 0.0),
    n_steps: int = 2000,
    newton_tol: float = 1e-10,
    max_newton: int = 50,
) -> SystemSolution:
    """Damped Newton shooting for the system boundary condition.

    Unknowns (a, b) = (y, x)(-T).  The system defect F(a, b) =
    (x(T) - a, y(T) - b) vanishes on whole families that do not solve the
    reflection problem, so the residual is augmented with the original
    periodicity x(-T) - x(T) = b - a, which every genuine solution
    satisfies; Newton then targets genuine candidates and still drives F
    itself to <= newton_tol.  The Jacobian is forward differences; steps
    are least-squares (minimum norm), so residual families project the
    guess onto a nearby zero rather than failing outright.  A converged
    trajectory is still not a certificate: run filter_reflection_solution.
    """
    if problem.mode is not BoundaryMode.PERIODIC:
        raise ValueError("shoot_periodic requires periodic mode")

    def defect(ab):
        sol = _integrate_system(problem, ab, n_steps)
        F = np.array([sol.x_values[-1] - ab[0], sol.y_values[-1] - ab[1], ab[1] - ab[0]])
        return F, sol

    ab = np.asarray(guess, dtype=float)
    F, sol = defect(ab)
    for _ in range(max_newton):
        norm = np.linalg.norm(F)
        if norm <= newton_tol:
            return sol
        jac = np.empty((3, 2))
        for j in range(2):
            step = 1e-7 * (1.0 + abs(ab[j]))
            pert = ab.copy()
            pert[j] += step
            Fp, _ = defect(pert)
            jac[:, j] = (Fp - F) / step
        if not np.all(np.isfinite(jac)):
            raise SingularJacobian("Jacobian has non-finite entries")
        delta = np.linalg.lstsq(jac, -F, rcond=None)[0]
        if not np.all(np.isfinite(delta)):
            raise SingularJacobian("Newton step is non-finite")
        # damping: halve until the defect decreases (at most 30 times);
        # a trial step that blows up the integration counts as too large
        lam = 1.0
        for _ in range(30):
            try:
                F_new, sol_new = defect(ab + lam * delta)
            except NonFinite:
                lam /= 2.0
                continue
            if np.linalg.norm(F_new) < norm:
                break
            lam /= 2.0
        else:
            raise NoConvergence("damping failed to reduce the defect", last_defect=F, iterations=max_newton)
        ab = ab + lam * delta
        F, sol = F_new, sol_new
    if np.linalg.norm(F) <= newton_tol:
        return sol
    raise NoConvergence(
        f"no convergence after {max_newton} Newton iterations (defect {np.linalg.norm(F):.3e})",
        last_defect=F,
        iterations=max_newton,
    )


@dataclass
class FilterVerdict:
    """Genuine/spurious classification of a system trajectory."""

    genuine: bool
    reflection_defect: float
    boundary_defect: float
    worst_t: float | None = None

    def to_dict(self):
        return {
            "genuine": self.genuine,
            "reflection_defect": self.reflection_defect,
            "boundary_defect": self.boundary_defect,
            "worst_t": self.worst_t,
        }


def filter_reflection_solution(sol: SystemSolution, tol: float = 1e-8, periodic: bool = True) -> FilterVerdict:
    """Accept a system trajectory only if it solves the reflection problem.

    Genuine iff y(t) = x(-t) on the grid and, in periodic mode, x(T) = x(-T).
    The grid must be symmetric so x(-t_i) is a grid value.
    """
    times = sol.times
    if not np.allclose(times, -times[::-1], atol=1e-12 * max(1.0, abs(times[-1]))):
        raise ValueError("trajectory grid must be symmetric about 0")
    defects = np.abs(sol.y_values - sol.x_values[::-1])
    i = int(np.argmax(defects))
    refl = float(defects[i])
    bdry = float(abs(sol.x_values[-1] - sol.x_values[0])) if periodic else 0.0
    genuine = refl <= tol and bdry <= tol
    return FilterVerdict(
        genuine=genuine,
        reflection_defect=refl,
        boundary_defect=bdry,
        worst_t=None if genuine else float(times[i]),
    )


def sinh_fixture():
    """f = sinh with inverse and derivative, for the reflection involution."""
    return dict(
        f_scalar=math.sinh,
        finv=math.asinh,
        fprime=math.cosh,
        involution=REFLECTION,
    )


def logistic_family_solution(c: float, times) -> SystemSolution:
    """Closed-form family solving the system for f(t, y, x) = x*y.

    (x, y)(t) = (c e^{ct}/(e^{ct}+1), c/(e^{ct}+1)).  Every member meets the
    system boundary condition, but only c = 0 solves the reflection problem.
    """
    times = np.asarray(times, dtype=float)
    e = np.exp(c * times)
    return SystemSolution(times=times, y_values=c / (e + 1.0), x_values=c * e / (e + 1.0))
