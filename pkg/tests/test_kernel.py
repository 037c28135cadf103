import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from refleq.errors import InternalInconsistency, OnDiagonal, OutOfDomain, ParameterMismatch, ResonantKernel
from refleq.kernel import (
    Kernel,
    ProblemParams,
    SignClass,
    check_resonance,
    classify_sign,
    kernel_bounds,
    reflect_negate_residual,
)

PAIRS = [(0.3, 1.0), (-0.3, 1.0), (0.7, 1.0), (1.5, 1.0), (0.5, 2.0)]


def kernels():
    return [Kernel(ProblemParams(m, T)) for m, T in PAIRS]


def test_params_validation():
    with pytest.raises(ValueError):
        ProblemParams(0.0, 1.0)
    with pytest.raises(ValueError):
        ProblemParams(1.0, -1.0)
    assert ProblemParams(0.5, 2.0).alpha == 1.0


def test_resonance_detection():
    assert check_resonance(ProblemParams(math.pi, 1.0)).resonant
    assert check_resonance(ProblemParams(2 * math.pi, 1.0)).k == 2
    assert check_resonance(ProblemParams(-math.pi, 1.0)).k == 1
    assert not check_resonance(ProblemParams(math.pi + 1e-3, 1.0)).resonant
    assert check_resonance(ProblemParams(math.pi + 1e-12, 1.0)).resonant


def test_resonant_kernel_raises():
    k = Kernel(ProblemParams(math.pi, 1.0))
    with pytest.raises(ResonantKernel):
        k.g(0.1, 0.2)
    with pytest.raises(ResonantKernel):
        k.gbar(0.1, 0.2)


def test_out_of_domain():
    k = Kernel(ProblemParams(0.5, 1.0))
    with pytest.raises(OutOfDomain):
        k.g(1.5, 0.0)
    with pytest.raises(OutOfDomain):
        k.gbar(0.0, -1.2)


def test_g_point_value():
    # G(0,0) = cos(mT)/(2 m sin(mT)) at m=1, T=1
    k = Kernel(ProblemParams(1.0, 1.0))
    assert k.g(0.0, 0.0) == pytest.approx(math.cos(1.0) / (2 * math.sin(1.0)), abs=1e-15)


def test_g_symmetries_on_grid():
    for k in kernels():
        T = k.params.T
        u = np.linspace(-T, T, 101)
        tt, ss = np.meshgrid(u, u, indexing="ij")
        vals = k.g(tt, ss)
        assert np.max(np.abs(vals - k.g(ss, tt))) <= 1e-12
        assert np.max(np.abs(vals - k.g(-tt, -ss))) <= 1e-12


def test_g_second_derivative_identity():
    # d^2G/dt^2 + m^2 G = 0 off the diagonal, finite differences
    k = Kernel(ProblemParams(1.0, 1.0))
    eps = 1e-5
    for t, s in [(0.2, 0.6), (-0.4, 0.1), (0.5, -0.5 + 1e-3)]:
        d2 = (k.g(t + eps, s) - 2 * k.g(t, s) + k.g(t - eps, s)) / eps**2
        assert abs(d2 + k.params.m**2 * k.g(t, s)) <= 1e-5


def test_g_t_derivative_jump():
    # dG/dt jumps by 1 across s = t
    k = Kernel(ProblemParams(1.0, 1.0))
    t = 0.3
    eps = 1e-6

    def dgdt(tv, s):
        return (k.g(tv + eps, s) - k.g(tv - eps, s)) / (2 * eps)

    jump = dgdt(t, t - 1e-4) - dgdt(t, t + 1e-4)
    assert jump == pytest.approx(1.0, abs=1e-4)


def test_gbar_factored_agrees():
    for k in kernels():
        T = k.params.T
        u = np.linspace(-T, T, 151)
        tt, ss = np.meshgrid(u, u, indexing="ij")
        gap = np.abs(k.gbar(tt, ss) - k.gbar(tt, ss, factored=True))
        assert np.max(gap) <= 1e-12


def test_gbar_v_prime_symmetry():
    # Gbar(t,s) = Gbar(-s,-t), diagonal included
    for k in kernels():
        T = k.params.T
        u = np.linspace(-T, T, 101)
        tt, ss = np.meshgrid(u, u, indexing="ij")
        assert np.max(np.abs(k.gbar(tt, ss) - k.gbar(-ss, -tt))) <= 1e-12


def test_gbar_reflect_negate_identity():
    for m, T in PAIRS:
        kp = Kernel(ProblemParams(m, T))
        kn = Kernel(ProblemParams(-m, T))
        assert reflect_negate_residual(kp, kn) <= 1e-12


def test_reflect_negate_mismatch():
    kp = Kernel(ProblemParams(0.5, 1.0))
    with pytest.raises(ParameterMismatch):
        reflect_negate_residual(kp, Kernel(ProblemParams(-0.5, 2.0)))
    with pytest.raises(ParameterMismatch):
        reflect_negate_residual(kp, kp)


def test_gbar_jump_is_one():
    for k in kernels():
        t = np.linspace(-k.params.T, k.params.T, 41)
        left, right = k.gbar_diagonal_limits(t)
        assert np.max(np.abs((left - right) - 1.0)) <= 1e-10


def test_gbar_diagonal_convention_side():
    # m > 0 stores the limit from above, m < 0 from below
    kp = Kernel(ProblemParams(0.5, 1.0))
    kn = Kernel(ProblemParams(-0.5, 1.0))
    t = 0.3
    lp, rp = kp.gbar_diagonal_limits(t)
    ln, rn = kn.gbar_diagonal_limits(t)
    assert kp.gbar(t, t) == pytest.approx(rp, abs=1e-15)
    assert kn.gbar(t, t) == pytest.approx(ln, abs=1e-15)


def test_gbar_continuous_across_antidiagonal():
    k = Kernel(ProblemParams(0.7, 1.0))
    for t in (0.25, -0.6):
        v0 = k.gbar(t, -t)
        assert abs(k.gbar(t, -t + 1e-9) - v0) <= 1e-8
        assert abs(k.gbar(t, -t - 1e-9) - v0) <= 1e-8


def test_gbar_dt_identity_and_guard():
    k = Kernel(ProblemParams(1.0, 1.0))
    t, s = 0.2, 0.6
    assert k.gbar_dt(t, s) == pytest.approx(-1.0 * k.gbar(-t, s), abs=1e-15)
    eps = 1e-6
    fd = (k.gbar(t + eps, s) - k.gbar(t - eps, s)) / (2 * eps)
    assert abs(fd - k.gbar_dt(t, s)) <= 1e-6 * max(1.0, abs(fd))
    with pytest.raises(OnDiagonal):
        k.gbar_dt(0.3, 0.3)
    with pytest.raises(OnDiagonal):
        k.gbar_dt(0.3, -0.3)


@settings(max_examples=50, deadline=None)
@given(
    m=st.floats(min_value=-3.0, max_value=3.0).filter(lambda x: abs(x) > 0.05 and abs(abs(x) - math.pi) > 0.05),
    t=st.floats(min_value=-1.0, max_value=1.0),
    s=st.floats(min_value=-1.0, max_value=1.0),
)
def test_gbar_symmetry_property(m, t, s):
    k = Kernel(ProblemParams(m, 1.0))
    assert k.gbar(t, s) == pytest.approx(k.gbar(-s, -t), abs=1e-12)


def test_sign_positive_window():
    for alpha in np.linspace(0.05, math.pi / 4 - 0.02, 8):
        rep = classify_sign(ProblemParams(alpha, 1.0))
        assert rep.classification is SignClass.STRICTLY_POSITIVE
        rep_neg = classify_sign(ProblemParams(-alpha, 1.0))
        assert rep_neg.classification is SignClass.STRICTLY_NEGATIVE


def test_sign_boundary_alpha():
    rep = classify_sign(ProblemParams(math.pi / 4, 1.0))
    assert rep.classification is SignClass.NONNEG_VANISHING_ON_P
    assert (1.0, -1.0) in [tuple(p) for p in rep.vanishing_set]
    rep = classify_sign(ProblemParams(-math.pi / 4, 1.0))
    assert rep.classification is SignClass.NONPOS_VANISHING_ON_P
    assert (-1.0, 1.0) in [tuple(p) for p in rep.vanishing_set]


def test_sign_mixed_and_resonant():
    assert classify_sign(ProblemParams(2.0, 1.0)).classification is SignClass.MIXED_SIGN
    assert classify_sign(ProblemParams(math.pi, 1.0)).classification is SignClass.RESONANT


def test_sign_scales_with_T():
    # classification depends on alpha = m*T only
    rep = classify_sign(ProblemParams(math.pi / 8, 2.0))
    assert rep.classification is SignClass.NONNEG_VANISHING_ON_P


def test_kernel_bounds_bracket_row_average():
    # sup > 1/(2Tm) > inf for m in the positivity window (row integral is 1/m)
    # pairs with alpha = mT inside (0, pi/4), where Gbar is strictly positive
    for m, T in [(0.3, 1.0), (0.7, 1.0), (0.35, 2.0)]:
        M, L, argmax, argmin = kernel_bounds(ProblemParams(m, T))
        avg = 1.0 / (2 * T * m)
        assert L < avg < M
        assert 0 < L
        km = Kernel(ProblemParams(m, T))
        lo, hi = km.gbar_diagonal_limits(argmax[0]) if argmax[0] == argmax[1] else (None, None)
        # the reported extrema are attained values (within refinement tolerance)
        assert M >= np.max(km.gbar(*np.meshgrid(np.linspace(-T, T, 101), np.linspace(-T, T, 101)))) - 1e-9


def test_kernel_bounds_refinement_improves():
    p = ProblemParams(0.5, 1.0)
    M0, L0, _, _ = kernel_bounds(p, grid_n=51, refine_iters=0)
    M2, L2, _, _ = kernel_bounds(p, grid_n=51, refine_iters=2)
    assert M2 >= M0 - 1e-15
    assert L2 <= L0 + 1e-15
